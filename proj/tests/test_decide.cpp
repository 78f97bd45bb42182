#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etrforge/decide.hpp"
#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/reductions.hpp"
#include "etrforge/textio.hpp"

using namespace etrforge;

namespace {

FormulaPtr prop(const std::string& v) { return f_eq(t_var(v), t_int(1)); }

FormulaPtr booleanity(const std::string& v) {
  return f_or(f_eq(t_var(v), t_int(0)), f_eq(t_var(v), t_int(1)));
}

}  // namespace

TEST_CASE("check_witness on the unit vector sentence") {
  TermPtr iv = t_ivar("x", {t_var("e1"), t_var("e2")});
  EtrInstance inst;
  inst.dialect = Dialect::SigmaViEtr;
  inst.formula = f_eq(t_sum("e1", 2, t_sum("e2", 2, t_mul(iv, iv))), t_int(1));
  Assignment a{{"x[00]", Rational(1)}, {"x[01]", Rational(0)}, {"x[10]", Rational(0)},
               {"x[11]", Rational(0)}};
  CHECK(check_witness(inst, Witness::of(a)));
  a["x[00]"] = Rational(1, 2);
  CHECK_FALSE(check_witness(inst, Witness::of(a)));
}

TEST_CASE("l1 norm gates the bounded dialects") {
  EtrInstance inst;
  inst.dialect = Dialect::SigmaViEtr1;
  inst.formula = f_eq(t_int(0), t_int(0));  // trivially true
  // norm 2 fails regardless of the formula
  CHECK_FALSE(check_witness(inst, Witness::of(Assignment{{"x[0]", Rational(2)}})));
  CHECK(check_witness(inst, Witness::of(Assignment{{"x[0]", Rational(1)}})));

  inst.dialect = Dialect::SigmaEtrHalf;
  CHECK_FALSE(check_witness(inst, Witness::of(Assignment{{"x", Rational(3, 4)}})));
  CHECK(check_witness(inst, Witness::of(Assignment{{"x", Rational(1, 2)}})));

  // kind mismatches are errors, not false
  CHECK_THROWS_AS(check_witness(inst, Witness::of(Distribution{})), EtrError);
}

TEST_CASE("small-model gate on probabilistic instances") {
  ProbSatInstance inst;
  inst.vars = {"X"};
  inst.domain = 2;
  inst.small_model_p = 1;
  inst.formula = pf_atom(CmpOp::Eq, p_prob(e_top()), encode_integer(1));
  Distribution two;
  two.vars = {"X"};
  two.domain = 2;
  two.entries[{0}] = Rational(1, 2);
  two.entries[{1}] = Rational(1, 2);
  CHECK_FALSE(check_witness(inst, Witness::of(two)));  // support 2 > p = 1
  inst.small_model_p = 2;
  CHECK(check_witness(inst, Witness::of(two)));
}

TEST_CASE("brute force decision via Booleanity detection") {
  // x = 1 and x = 0 cannot both hold
  EtrInstance inst;
  inst.dialect = Dialect::Etr;
  inst.formula = f_and(f_and(booleanity("x"), f_eq(t_var("x"), t_int(1))),
                       f_eq(t_var("x"), t_int(0)));
  CHECK_FALSE(brute_force_decide(inst));

  inst.formula = f_and(booleanity("x"), f_eq(t_var("x"), t_int(1)));
  CHECK(brute_force_decide(inst));

  // the product pattern x(x - 1) = 0 also counts
  inst.formula = f_and(f_eq(t_mul(t_var("x"), t_sub(t_var("x"), t_int(1))), t_int(0)),
                       f_lt(t_int(0), t_var("x")));
  CHECK(brute_force_decide(inst));

  // free variables without a pattern cannot be decided by this backend
  inst.formula = f_eq(t_var("free"), t_int(1));
  CHECK_THROWS_AS(brute_force_decide(inst), EtrError);

  // explicit candidate annotations stand in for patterns
  inst.candidates["free"] = {Rational(0), Rational(1, 2)};
  CHECK_FALSE(brute_force_decide(inst));
  inst.candidates["free"] = {Rational(0), Rational(1)};
  CHECK(brute_force_decide(inst));
}

TEST_CASE("decide is monotone under adding a satisfied conjunct") {
  for (bool expect : {true, false}) {
    EtrInstance inst;
    inst.dialect = Dialect::Etr;
    inst.formula = f_and(booleanity("x"),
                         expect ? f_eq(t_var("x"), t_int(1))
                                : f_and(f_eq(t_var("x"), t_int(1)), f_eq(t_var("x"), t_int(0))));
    EtrInstance with_top = inst;
    with_top.formula = f_and(inst.formula, f_eq(t_int(0), t_int(0)));
    CHECK(brute_force_decide(inst) == expect);
    CHECK(brute_force_decide(with_top) == expect);
  }
}

TEST_CASE("closed pi-etr images agree with the qbf oracle exhaustively") {
  // all QBFs over at most 3 variables with a small matrix family
  for (int nvars = 1; nvars <= 3; ++nvars) {
    std::vector<std::string> vars;
    for (int i = 1; i <= nvars; ++i) vars.push_back("v" + std::to_string(i));
    std::vector<FormulaPtr> matrices;
    for (const auto& v : vars) {
      matrices.push_back(prop(v));
      matrices.push_back(f_not(prop(v)));
    }
    matrices.push_back(f_or(prop(vars[0]), f_not(prop(vars[nvars - 1]))));
    matrices.push_back(f_and(prop(vars[0]), prop(vars[nvars - 1])));
    for (long mask = 0; mask < (1L << nvars); ++mask) {
      QbfInstance q;
      for (int i = 0; i < nvars; ++i)
        q.prefix.emplace_back((mask >> i) & 1 ? Quant::Forall : Quant::Exists, vars[i]);
      for (const auto& m : matrices) {
        q.matrix = m;
        auto pass = qbf_to_pietr(q);
        CHECK(brute_force_decide(pass.target) == eval_qbf(q));
      }
    }
  }
}

TEST_CASE("emajsat images decide like the counting oracle") {
  EmajsatInstance inst;
  inst.xvars = {"x1", "x2"};
  inst.yvars = {"y1", "y2"};
  // (x1 or y1) and (x2 or y2): choosing x1 = x2 = 1 satisfies all four
  inst.matrix = f_and(f_or(prop("x1"), prop("y1")), f_or(prop("x2"), prop("y2")));
  CHECK(brute_force_decide(emajsat_to_sigmaetr(inst).target));
  // y1 and not y1 is unsatisfiable for every x
  inst.matrix = f_and(prop("y1"), f_not(prop("y1")));
  CHECK_FALSE(brute_force_decide(emajsat_to_sigmaetr(inst).target));
}

TEST_CASE("decision respects the search space cap") {
  EtrInstance inst;
  inst.dialect = Dialect::Etr;
  std::vector<FormulaPtr> parts;
  for (int i = 0; i < 25; ++i) {
    std::string name = "v" + std::to_string(i);
    parts.push_back(booleanity(name));
  }
  inst.formula = f_and_all(parts);
  CHECK_THROWS_AS(brute_force_decide(inst), EtrError);
}
