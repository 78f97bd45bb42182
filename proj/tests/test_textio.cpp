#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/textio.hpp"

using namespace etrforge;
namespace io = etrforge::textio;

TEST_CASE("term grammar") {
  TermPtr t = io::parse_term("(sum e 2 (mul (var x) (var e)))");
  CHECK(t->kind == TermKind::Sum);
  CHECK(io::print_term(t) == "(sum e 2 (mul (var x) (var e)))");

  FormulaPtr f = io::parse_formula("(eq (sum e 2 (mul (var x) (var e))) (const 1))");
  CHECK(f->kind == FormulaKind::Atom);
  CHECK(f->op == CmpOp::Eq);

  // n-ary add folds to the left and prints binary
  TermPtr sum3 = io::parse_term("(add (const 1) (const 2) (const 3))");
  CHECK(io::print_term(sum3) == "(add (add (const 1) (const 2)) (const 3))");

  CHECK_THROWS_AS(io::parse_term("(frob 1)"), EtrError);
  CHECK_THROWS_AS(io::parse_term("(add (const 1)"), EtrError);
  CHECK_THROWS_AS(io::parse_term("(const 1) junk"), EtrError);
}

TEST_CASE("the co-Sat sentence parses and evaluates") {
  std::string text =
      "#etrforge v1\n"
      "dialect: sigma-etr\n"
      "(eq (sum x1 2 (sum x2 2 (mul (mul (add (var x1) (var x2)) "
      "(add (var x1) (add (const 1) (neg (var x2))))) (add (const 1) (neg (var x1)))))) "
      "(const 0))\n";
  EtrInstance inst = io::parse_etr(text);
  CHECK(inst.dialect == Dialect::SigmaEtr);
  CHECK(eval_formula(inst.formula, {}));
  CHECK(io::print_etr(inst) == text);
}

TEST_CASE("dialect violations surface at parse time") {
  std::string text =
      "#etrforge v1\n"
      "dialect: sigma-etr\n"
      "(eq (ivar X (var e1) (var e2)) (const 0))\n";
  CHECK_THROWS_AS(io::parse_etr(text), EtrError);
}

TEST_CASE("version header is required") {
  CHECK_THROWS_AS(io::parse_etr("dialect: etr\n(eq (const 0) (const 0))\n"), EtrError);
}

TEST_CASE("distribution format") {
  std::string text =
      "#etrforge v1\n"
      "vars: X1 X2; domain: 2\n"
      "0 0 : 1/2\n"
      "1 1 : 1/2\n";
  Distribution d = io::parse_distribution(text);
  CHECK(d.vars == std::vector<std::string>{"X1", "X2"});
  CHECK(d.entries.at({0, 0}) == Rational(1, 2));
  // canonical printing sorts tuples lexicographically
  CHECK(io::print_distribution(d) == text);

  Distribution unsorted;
  unsorted.vars = {"X1", "X2"};
  unsorted.domain = 2;
  unsorted.entries[{1, 1}] = Rational(1, 2);
  unsorted.entries[{0, 0}] = Rational(1, 2);
  CHECK(io::print_distribution(unsorted) == text);

  CHECK_THROWS_AS(io::parse_distribution("#etrforge v1\nvars: X; domain: 2\n0 : 2/3\n"), EtrError);
}

TEST_CASE("qbf format") {
  std::string text =
      "#etrforge v1\n"
      "prefix: A x1 E x2\n"
      "matrix: (or (eq (var x1) (const 1)) (not (eq (var x2) (const 1))))\n";
  QbfInstance q = io::parse_qbf(text);
  CHECK(q.prefix.size() == 2);
  CHECK(q.prefix[0].first == Quant::Forall);
  CHECK(io::print_qbf(q) == text);
}

TEST_CASE("succinct circuit format") {
  std::string text =
      "#etrforge v1\n"
      "inputs: 1; outputs: g0 g1 g2 g0 g1 g2 g0 g1 g2 g0 g1 g2\n"
      "g0 = INPUT0\n"
      "g1 = NOT g0\n"
      "g2 = AND g0 g1\n";
  SuccCircuit s = io::parse_succ(text);
  CHECK(s.circuit.gates.size() == 3);
  CHECK_FALSE(s.unary_vars);
  CHECK(io::print_succ(s) == text);

  // gate operand order and ids are validated
  CHECK_THROWS_AS(io::parse_succ("#etrforge v1\ninputs: 1; outputs: g0\ng0 = NOT g1\n"), EtrError);
}

TEST_CASE("witness formats") {
  std::string text =
      "#etrforge v1\n"
      "witness: assignment\n"
      "x : -1/4\n"
      "y[01] : 3\n";
  Witness w = io::parse_witness(text);
  CHECK(w.kind == WitnessKind::AssignmentW);
  CHECK(w.assignment.at("y[01]") == Rational(3));
  CHECK(io::print_witness(w) == text);

  std::string tables =
      "#etrforge v1\n"
      "witness: eso-tables\n"
      "table m/0\n"
      ": -1\n"
      "end\n"
      "table q/1\n"
      "0 : 1/8\n"
      "1 : 0\n"
      "end\n";
  Witness tw = io::parse_witness(tables);
  CHECK(tw.kind == WitnessKind::EsoTablesW);
  CHECK(tw.tables.tables.at("m").entries.at({}) == Rational(-1));
  CHECK(io::print_witness(tw) == tables);
}

TEST_CASE("eso instance format") {
  std::string text =
      "#etrforge v1\n"
      "domain: 0 1\n"
      "rel One/1\n"
      "1\n"
      "end\n"
      "fun w/1\n"
      "0 : 1/2\n"
      "1 : 1/2\n"
      "end\n"
      "sentence: (existsf f 1 (forall x (le (app f x) (const 1))))\n";
  EsoInstance inst = io::parse_eso(text);
  CHECK(inst.structure.domain.size() == 2);
  CHECK(inst.structure.relations.at("One").tuples.count({1}) == 1);
  CHECK(io::print_eso(inst) == text);
}

TEST_CASE("prob instance format") {
  std::string text =
      "#etrforge v1\n"
      "vars: X1 X2; domain: 3\n"
      "small-model: 2\n"
      "(le (P (and (eq X1 1) (eq X2 2))) (sum s 3 (P (eq X1 s))))\n";
  ProbSatInstance inst = io::parse_prob(text);
  CHECK(inst.domain == 3);
  CHECK(inst.small_model_p == 2);
  CHECK(io::print_prob(inst) == text);
}

TEST_CASE("candidate annotations round trip") {
  std::string text =
      "#etrforge v1\n"
      "dialect: etr\n"
      "(eq (var x) (var y))\n"
      "(candidates x (0 1/2 1))\n"
      "(candidates y (0 1))\n";
  EtrInstance inst = io::parse_etr(text);
  CHECK(inst.candidates.at("x").size() == 3);
  CHECK(io::print_etr(inst) == text);
}
