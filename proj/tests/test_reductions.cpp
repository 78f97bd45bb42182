#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "etrforge/decide.hpp"
#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/reductions.hpp"
#include "etrforge/textio.hpp"

using namespace etrforge;

namespace {

FormulaPtr prop(const std::string& v) { return f_eq(t_var(v), t_int(1)); }

Rational rnd_rat(std::mt19937_64& rng) {
  return Rational(static_cast<long>(rng() % 19) - 9, static_cast<long>(rng() % 9) + 1);
}

}  // namespace

TEST_CASE("arithmetize_bool follows the inductive rules") {
  CHECK(term_equal(arithmetize_bool(f_and(prop("x"), prop("y"))),
                   t_mul(t_var("x"), t_var("y"))));
  CHECK(term_equal(arithmetize_bool(f_not(prop("x"))), t_sub(t_int(1), t_var("x"))));
  // disjunction sweeps the whole truth table
  TermPtr a = arithmetize_bool(f_or(prop("x"), prop("y")));
  for (long x = 0; x <= 1; ++x)
    for (long y = 0; y <= 1; ++y) {
      Assignment asg{{"x", Rational(x)}, {"y", Rational(y)}};
      CHECK(eval_term(a, asg) == Rational((x || y) ? 1 : 0));
    }
  CHECK_THROWS_AS(arithmetize_bool(f_le(t_var("x"), t_int(1))), EtrError);
}

TEST_CASE("qbf_to_pietr matches the quantifier semantics") {
  QbfInstance q;
  q.prefix = {{Quant::Forall, "x"}};
  q.matrix = f_or(prop("x"), f_not(prop("x")));
  auto tautology = qbf_to_pietr(q);
  CHECK(tautology.target.dialect == Dialect::PiEtr);
  CHECK(validate_dialect(tautology.target).ok());
  CHECK(eval_formula(tautology.target.formula, {}));

  q.matrix = prop("x");
  auto forall_x = qbf_to_pietr(q);
  CHECK_FALSE(eval_formula(forall_x.target.formula, {}));
  // the product itself evaluates to 0
  CHECK(eval_term(forall_x.target.formula->lhs, {}) == Rational(0));

  q.prefix = {{Quant::Exists, "x"}};
  auto exists_x = qbf_to_pietr(q);
  CHECK(eval_formula(exists_x.target.formula, {}));
  CHECK(eval_term(exists_x.target.formula->lhs, {}) == Rational(1));
}

TEST_CASE("emajsat_to_sigmaetr against direct counting") {
  EmajsatInstance inst;
  inst.xvars = {"x"};
  inst.yvars = {"y"};

  inst.matrix = prop("y");
  auto easy = emajsat_to_sigmaetr(inst);
  CHECK(validate_dialect(easy.target).ok());
  CHECK(brute_force_decide(easy.target));
  // X = 0 already works; the witness maps restrict to the x variables
  Witness w = Witness::of(Assignment{{"x", Rational(0)}, {"y", Rational(1)}});
  CHECK(easy.forward(w).assignment == Assignment{{"x", Rational(0)}});

  inst.matrix = f_and(prop("x"), prop("y"));
  CHECK(brute_force_decide(emajsat_to_sigmaetr(inst).target));

  inst.matrix = f_and(f_and(prop("x"), f_not(prop("x"))), prop("y"));
  CHECK_FALSE(brute_force_decide(emajsat_to_sigmaetr(inst).target));
}

TEST_CASE("solution bound exponent record") {
  SolutionBound b1 = compute_solution_bound({1, 2, 1, 1});
  CHECK(b1.exponent == 2);
  CHECK(b1.bound() == Rational(4));
  SolutionBound b2 = compute_solution_bound({2, 2, 2, 1});
  CHECK(b2.exponent == 8);
  CHECK(b2.bound() == Rational(256));
  // monotone in each parameter
  CHECK(compute_solution_bound({2, 2, 1, 1}).exponent >= b1.exponent);
  CHECK(compute_solution_bound({1, 3, 1, 1}).exponent >= b1.exponent);
  CHECK(compute_solution_bound({1, 2, 2, 1}).exponent >= b1.exponent);
  CHECK(compute_solution_bound({1, 2, 1, 2}).exponent >= b1.exponent);
}

TEST_CASE("successor indicator against the brute-force table") {
  for (int m = 1; m <= 3; ++m) {
    std::vector<std::string> ebits, fbits;
    for (int i = 1; i <= m; ++i) {
      ebits.push_back("e" + std::to_string(i));
      fbits.push_back("f" + std::to_string(i));
    }
    TermPtr a = successor_indicator(ebits, fbits);
    for (long e = 0; e < (1L << m); ++e) {
      for (long f = 0; f < (1L << m); ++f) {
        Assignment asg;
        for (int i = 0; i < m; ++i) {
          asg[ebits[static_cast<size_t>(i)]] = Rational((e >> (m - 1 - i)) & 1);
          asg[fbits[static_cast<size_t>(i)]] = Rational((f >> (m - 1 - i)) & 1);
        }
        Rational want((f == e + 1) ? 1 : 0);
        CHECK(eval_term(a, asg) == want);
      }
    }
  }
}

TEST_CASE("sumvi_to_sumvi1 forces the squaring chain and scales witnesses") {
  // source: sum_e x_<e> = 0, satisfied by the all-zero witness
  EtrInstance inst;
  inst.dialect = Dialect::SigmaViEtr;
  inst.formula = f_eq(t_sum("e", 2, t_ivar("x", {t_var("e")})), t_int(0));
  auto pass = sumvi_to_sumvi1(inst, 1);
  CHECK(pass.target.dialect == Dialect::SigmaViEtr1);
  CHECK(validate_dialect(pass.target).ok());

  Assignment zero{{"x[0]", Rational(0)}, {"x[1]", Rational(0)}};
  Witness fw = pass.forward(Witness::of(zero));
  // scaled source entries are still zero
  CHECK(fw.assignment.at("x[0]") == Rational(0));
  CHECK(fw.assignment.at("x[1]") == Rational(0));
  // and the chain anchors t_1 = 1/(2^m + 2^S) exactly; the transported witness
  // satisfies the whole target including both chain equations
  CHECK(check_witness(pass.target, fw));
  // the l1 gate of the target dialect is respected
  CHECK(l1_norm(fw.assignment) <= Rational(1));
  // backward returns to the source witness
  Witness back = pass.backward(fw);
  CHECK(back.assignment.at("x[0]") == Rational(0));
  CHECK(back.assignment.at("x[1]") == Rational(0));

  // a satisfiable instance with a nonzero witness round-trips through scaling
  EtrInstance nz;
  nz.dialect = Dialect::SigmaViEtr;
  nz.formula = f_eq(t_sum("e", 2, t_ivar("y", {t_var("e")})), t_int(3));
  auto pass2 = sumvi_to_sumvi1(nz, 2);
  Assignment w{{"y[0]", Rational(1)}, {"y[1]", Rational(2)}};
  CHECK(check_witness(nz, Witness::of(w)));
  Witness fw2 = pass2.forward(Witness::of(w));
  CHECK(check_witness(pass2.target, fw2));
  Witness back2 = pass2.backward(fw2);
  CHECK(back2.assignment.at("y[0]") == Rational(1));
  CHECK(back2.assignment.at("y[1]") == Rational(2));
}

TEST_CASE("sumvi1_to_probsat reproduces the proof's case table") {
  // anchor instance over the width-1 family x
  TermPtr sq = t_mul(t_ivar("x", {t_var("e")}), t_ivar("x", {t_var("e")}));
  EtrInstance inst;
  inst.dialect = Dialect::SigmaViEtr1;

  SUBCASE("all-zero witness spreads the idle mass uniformly") {
    inst.formula = f_eq(t_sum("e", 2, sq), t_int(0));
    auto pass = sumvi1_to_probsat(inst);
    Assignment zero{{"x[0]", Rational(0)}, {"x[1]", Rational(0)}};
    Witness d = pass.forward(Witness::of(zero));
    CHECK(d.distribution.entries.at({0, 0}) == Rational(1, 2));
    CHECK(d.distribution.entries.at({0, 1}) == Rational(1, 2));
    CHECK(support_size(d.distribution) == 2);
    CHECK(check_witness(pass.target, d));
  }

  SUBCASE("the mixed-sign witness from the construction") {
    // x0 = 1/2, x1 = -1/4, alpha = 3/4
    Rational total = Rational(1, 2) * Rational(1, 2) + Rational(1, 4) * Rational(1, 4);
    inst.formula = f_and(f_eq(t_sum("e", 2, sq), t_const(total)),
                         f_eq(t_ivar("x", {t_int(0)}), t_const(Rational(1, 2))));
    auto pass = sumvi1_to_probsat(inst);
    Assignment w{{"x[0]", Rational(1, 2)}, {"x[1]", Rational(-1, 4)}};
    CHECK(check_witness(inst, Witness::of(w)));
    Witness d = pass.forward(Witness::of(w));
    CHECK(d.distribution.entries.at({1, 0}) == Rational(1, 2));   // X0 = 1 carries max(x0, 0)
    CHECK(d.distribution.entries.at({2, 1}) == Rational(1, 4));   // X0 = -1 carries max(-x1, 0)
    CHECK(d.distribution.entries.at({0, 0}) == Rational(1, 8));
    CHECK(d.distribution.entries.at({0, 1}) == Rational(1, 8));
    CHECK(check_witness(pass.target, d));
    // backward recovers the witness exactly
    Witness back = pass.backward(d);
    CHECK(back.assignment.at("x[0]") == Rational(1, 2));
    CHECK(back.assignment.at("x[1]") == Rational(-1, 4));
  }

  SUBCASE("witnesses beyond the norm bound are refused") {
    inst.formula = f_eq(t_sum("e", 2, sq), t_int(0));
    auto pass = sumvi1_to_probsat(inst);
    Assignment big{{"x[0]", Rational(2)}, {"x[1]", Rational(0)}};
    CHECK_THROWS_AS(pass.forward(Witness::of(big)), EtrError);
  }
}

TEST_CASE("arithmetize_event indicators") {
  std::vector<std::string> vars{"X"};
  // binary base case 1 - (X - 1)^2
  TermPtr a = arithmetize_event(e_eq("X", 1), vars, 2);
  CHECK(eval_term(a, {{"X", Rational(1)}}) == Rational(1));
  CHECK(eval_term(a, {{"X", Rational(0)}}) == Rational(0));
  // negation
  TermPtr b = arithmetize_event(e_not(e_eq("X", 0)), vars, 2);
  CHECK(eval_term(b, {{"X", Rational(0)}}) == Rational(0));
  CHECK(eval_term(b, {{"X", Rational(1)}}) == Rational(1));
  // ternary Lagrange indicator
  TermPtr c = arithmetize_event(e_eq("X", 2), vars, 3);
  CHECK(eval_term(c, {{"X", Rational(0)}}) == Rational(0));
  CHECK(eval_term(c, {{"X", Rational(1)}}) == Rational(0));
  CHECK(eval_term(c, {{"X", Rational(2)}}) == Rational(1));
  // out-of-domain values are rejected
  CHECK_THROWS_AS(arithmetize_event(e_eq("X", 5), vars, 2), EtrError);
}

TEST_CASE("normalize_prob_primitives yields full-tuple primitives") {
  std::vector<std::string> vars{"X1", "X2"};

  // P(X1 = 1) becomes a summation over the unconstrained variable
  ProbFormulaPtr f = pf_atom(CmpOp::Eq, p_prob(e_eq("X1", 1)), p_prob(e_top()));
  ProbFormulaPtr norm = normalize_prob_primitives(f, vars, 2);
  ProbTermPtr lhs = norm->lhs;
  REQUIRE(lhs->kind == ProbTermKind::Sum);
  CHECK(prob_term_equal(
      lhs->a, p_prob(e_and(e_eq("X1", 1), e_eq_dummy("X2", lhs->binder)))));

  // an already-full primitive stays unchanged
  ProbTermPtr full = p_prob(e_and(e_eq("X1", 0), e_eq("X2", 1)));
  ProbFormulaPtr g = pf_atom(CmpOp::Le, full, full);
  ProbFormulaPtr gn = normalize_prob_primitives(g, vars, 2);
  CHECK(prob_term_equal(gn->lhs, full));

  // P(top) normalizes to the total mass and still evaluates to 1
  Distribution d;
  d.vars = vars;
  d.domain = 2;
  d.entries[{0, 1}] = Rational(1, 3);
  d.entries[{1, 0}] = Rational(2, 3);
  ProbFormulaPtr top = pf_atom(CmpOp::Eq, p_prob(e_top()), encode_integer(1));
  CHECK(eval_prob_formula(normalize_prob_primitives(top, vars, 2), d));

  // semantic preservation on random distributions
  std::mt19937_64 rng(5);
  for (int round = 0; round < 5; ++round) {
    Distribution r;
    r.vars = vars;
    r.domain = 2;
    long n00 = static_cast<long>(rng() % 5), n01 = static_cast<long>(rng() % 5);
    long n10 = static_cast<long>(rng() % 5), n11 = 1 + static_cast<long>(rng() % 5);
    long total = n00 + n01 + n10 + n11;
    r.entries[{0, 0}] = Rational(n00, total);
    r.entries[{0, 1}] = Rational(n01, total);
    r.entries[{1, 0}] = Rational(n10, total);
    r.entries[{1, 1}] = Rational(n11, total);
    ProbFormulaPtr probe = pf_atom(
        CmpOp::Le, p_prob(e_not(e_and(e_eq("X1", 0), e_eq("X2", 1)))),
        p_add(p_prob(e_eq("X1", 1)), p_prob(e_top())));
    CHECK(eval_prob_formula(probe, r) ==
          eval_prob_formula(normalize_prob_primitives(probe, vars, 2), r));
  }
}

TEST_CASE("smsat_to_sigmaetr selector arrays") {
  SUBCASE("p = 1 anchors a point distribution") {
    ProbSatInstance inst;
    inst.vars = {"X"};
    inst.domain = 2;
    inst.small_model_p = 1;
    inst.formula =
        pf_atom(CmpOp::Eq, p_prob(e_eq("X", 1)), encode_integer(1));
    inst.formula = normalize_prob_primitives(inst.formula, inst.vars, inst.domain);
    auto pass = smsat_to_sigmaetr(inst, 1);
    CHECK(validate_dialect(pass.target).ok());
    Assignment w{{"X1", Rational(1)}, {"e1_1", Rational(1)}};
    CHECK(check_witness(pass.target, Witness::of(w)));
  }

  SUBCASE("the uniform two-point distribution round-trips") {
    ProbSatInstance inst;
    inst.vars = {"X"};
    inst.domain = 2;
    inst.small_model_p = 2;
    inst.formula = pf_atom(CmpOp::Eq, p_mul(encode_integer(2), p_prob(e_eq("X", 1))),
                           encode_integer(1));
    inst.formula = normalize_prob_primitives(inst.formula, inst.vars, inst.domain);
    auto pass = smsat_to_sigmaetr(inst, 2);
    Distribution d;
    d.vars = {"X"};
    d.domain = 2;
    d.entries[{0}] = Rational(1, 2);
    d.entries[{1}] = Rational(1, 2);
    Witness fw = pass.forward(Witness::of(d));
    CHECK(fw.assignment.at("X1") == Rational(1, 2));
    CHECK(fw.assignment.at("e1_1") == Rational(0));
    CHECK(fw.assignment.at("e2_1") == Rational(1));
    CHECK(check_witness(pass.target, fw));
    Witness back = pass.backward(fw);
    CHECK(back.distribution.entries == d.entries);
  }

  SUBCASE("p = 0 degenerates to an unsatisfiable mass constraint") {
    ProbSatInstance inst;
    inst.vars = {"X"};
    inst.domain = 2;
    inst.formula = pf_atom(CmpOp::Eq, p_prob(e_top()), encode_integer(1));
    inst.formula = normalize_prob_primitives(inst.formula, inst.vars, inst.domain);
    auto pass = smsat_to_sigmaetr(inst, 0);
    CHECK_FALSE(brute_force_decide(pass.target));
  }

  SUBCASE("unnormalized input is refused") {
    ProbSatInstance inst;
    inst.vars = {"X", "Y"};
    inst.domain = 2;
    inst.formula = pf_atom(CmpOp::Eq, p_prob(e_eq("X", 1)), encode_integer(1));
    CHECK_THROWS_AS(smsat_to_sigmaetr(inst, 1), EtrError);
  }
}

TEST_CASE("sigmaetr_half_to_smsat") {
  SUBCASE("binder simulation evaluates sums exactly") {
    // sum_e e = 1 is a closed truth; the target must hold on any transported model
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtrHalf;
    inst.formula = f_eq(t_sum("e", 2, t_var("e")), t_int(1));
    auto pass = sigmaetr_half_to_smsat(inst);
    CHECK(pass.target.small_model_p == 3);  // one padding variable, n_eff = 1
    Witness d = pass.forward(Witness::of(Assignment{}));
    CHECK(check_witness(pass.target, d));
  }

  SUBCASE("the proof's mass split for a nonzero witness") {
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtrHalf;
    inst.formula = f_eq(t_var("x"), t_const(Rational(1, 4)));
    auto pass = sigmaetr_half_to_smsat(inst);
    Assignment w{{"x", Rational(1, 4)}};
    Witness d = pass.forward(Witness::of(w));
    validate_distribution(d.distribution);
    // mass 1/4 on the positive tuple, 1/2 on the q1 anchor, remainder elsewhere
    CHECK(d.distribution.entries.at({1, 0}) == Rational(1, 4));
    CHECK(d.distribution.entries.at({0, 1}) == Rational(1, 2));
    CHECK(support_size(d.distribution) <= 3);
    CHECK(check_witness(pass.target, d));
    Witness back = pass.backward(d);
    CHECK(back.assignment.at("x") == Rational(1, 4));
  }

  SUBCASE("all-zero witness needs only the anchor and the padding entry") {
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtrHalf;
    inst.formula = f_eq(t_var("x"), t_int(0));
    auto pass = sigmaetr_half_to_smsat(inst);
    Witness d = pass.forward(Witness::of(Assignment{{"x", Rational(0)}}));
    CHECK(support_size(d.distribution) == 2);
    CHECK(check_witness(pass.target, d));
  }

  SUBCASE("witnesses beyond the half bound are refused") {
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtrHalf;
    inst.formula = f_eq(t_var("x"), t_const(Rational(3, 4)));
    auto pass = sigmaetr_half_to_smsat(inst);
    CHECK_THROWS_AS(pass.forward(Witness::of(Assignment{{"x", Rational(3, 4)}})), EtrError);
  }
}

TEST_CASE("prenex_sums rewrite rules") {
  std::mt19937_64 rng(17);
  auto sum_of = [](const std::string& b, TermPtr body) { return t_sum(b, 2, body); };

  SUBCASE("product of sums becomes a nested sum of products") {
    TermPtr t = t_mul(sum_of("e", t_mul(t_var("a"), t_var("e"))),
                      sum_of("f", t_mul(t_var("b"), t_var("f"))));
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtr;
    inst.formula = f_eq(t, t_int(0));
    auto pass = prenex_sums(inst);
    FormulaPtr out = pass.target.formula;
    while (out->kind == FormulaKind::And) out = out->f;
    CHECK(is_sum_prenex(out->lhs));
    for (int round = 0; round < 10; ++round) {
      Assignment a{{"a", rnd_rat(rng)}, {"b", rnd_rat(rng)}};
      Witness pinned = pass.forward(Witness::of(a));
      CHECK(eval_term(t, a) == eval_term(out->lhs, pinned.assignment));
    }
  }

  SUBCASE("sum plus sum uses the halving variables") {
    TermPtr t = t_add(sum_of("e", t_mul(t_var("a"), t_var("e"))),
                      sum_of("f", t_mul(t_var("b"), t_var("f"))));
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtr;
    inst.formula = f_eq(t, t_int(0));
    auto pass = prenex_sums(inst);
    FormulaPtr out = pass.target.formula;
    // the Z defining equations were conjoined
    CHECK(out->kind == FormulaKind::And);
    FormulaPtr head = out;
    while (head->kind == FormulaKind::And) head = head->f;
    CHECK(is_sum_prenex(head->lhs));
    for (int round = 0; round < 10; ++round) {
      Assignment a{{"a", rnd_rat(rng)}, {"b", rnd_rat(rng)}};
      Witness pinned = pass.forward(Witness::of(a));
      CHECK(pinned.assignment.at("Z1") == Rational(1, 2));
      CHECK(eval_term(t, a) == eval_term(head->lhs, pinned.assignment));
      // and the defining equations hold under the pinned witness
      CHECK(eval_formula(pass.target.formula, pinned.assignment) ==
            eval_formula(inst.formula, a));
    }
  }

  SUBCASE("sum-free polynomials stay untouched") {
    TermPtr t = t_add(t_mul(t_var("a"), t_var("b")), t_int(3));
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtr;
    inst.formula = f_eq(t, t_int(0));
    auto pass = prenex_sums(inst);
    CHECK(formula_equal(pass.target.formula, inst.formula));
  }
}

TEST_CASE("remove_negations_formula pushes everything into < and =") {
  FormulaPtr f = f_not(f_and(f_le(t_var("x"), t_int(1)), f_not(f_eq(t_var("y"), t_int(0)))));
  FormulaPtr nf = remove_negations_formula(f);
  std::function<void(const FormulaPtr&)> scan = [&](const FormulaPtr& g) {
    CHECK(g->kind != FormulaKind::Not);
    if (g->kind == FormulaKind::Atom) {
      CHECK(g->op != CmpOp::Le);
      return;
    }
    scan(g->f);
    scan(g->g);
  };
  scan(nf);
  std::mt19937_64 rng(29);
  for (int round = 0; round < 50; ++round) {
    Assignment a{{"x", rnd_rat(rng)}, {"y", rnd_rat(rng)}};
    CHECK(eval_formula(f, a) == eval_formula(nf, a));
  }
}

TEST_CASE("flatten_single_poly gadgets") {
  SUBCASE("a single equality atom gets the forced root") {
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtr;
    inst.formula = f_eq(t_var("x"), t_var("y"));
    inst.candidates["x"] = {Rational(0), Rational(1)};
    inst.candidates["y"] = {Rational(0), Rational(1)};
    auto pass = flatten_single_poly(inst);
    REQUIRE(pass.target.formula->kind == FormulaKind::Atom);
    CHECK(pass.target.formula->op == CmpOp::Eq);
    CHECK(term_equal(pass.target.formula->rhs, t_int(0)));
    CHECK(brute_force_decide(pass.target));
    // forward transport produces a zero of the squared system
    Witness w = pass.forward(Witness::of(Assignment{{"x", Rational(1)}, {"y", Rational(1)}}));
    CHECK(eval_formula(pass.target.formula, w.assignment));
    // and backward restricts to the source variables
    Witness back = pass.backward(w);
    CHECK(back.assignment.size() == 2);
  }

  SUBCASE("strict atoms keep their direction") {
    EtrInstance lt_true;
    lt_true.dialect = Dialect::SigmaEtr;
    lt_true.formula = f_lt(t_int(0), t_int(1));
    CHECK(brute_force_decide(flatten_single_poly(lt_true).target));

    EtrInstance lt_false;
    lt_false.dialect = Dialect::SigmaEtr;
    lt_false.formula = f_lt(t_int(1), t_int(0));
    CHECK_FALSE(brute_force_decide(flatten_single_poly(lt_false).target));
  }

  SUBCASE("unsupported shapes are refused") {
    EtrInstance bad;
    bad.dialect = Dialect::SigmaEtr;
    bad.formula = f_le(t_var("x"), t_int(1));
    CHECK_THROWS_AS(flatten_single_poly(bad), EtrError);
    bad.formula = f_not(f_eq(t_var("x"), t_int(1)));
    CHECK_THROWS_AS(flatten_single_poly(bad), EtrError);
  }
}

TEST_CASE("permanent and permutation indicator") {
  // m = 1: the permanent is the single entry
  Assignment a{{"x1_1", Rational(5, 3)}};
  CHECK(eval_term(permanent_term(1), a) == Rational(5, 3));

  // m = 2: x11 x22 + x12 x21
  std::mt19937_64 rng(31);
  for (int round = 0; round < 5; ++round) {
    Assignment b;
    Rational x11 = rnd_rat(rng), x12 = rnd_rat(rng), x21 = rnd_rat(rng), x22 = rnd_rat(rng);
    b["x1_1"] = x11;
    b["x1_2"] = x12;
    b["x2_1"] = x21;
    b["x2_2"] = x22;
    CHECK(eval_term(permanent_term(2), b) == x11 * x22 + x12 * x21);
  }

  // delta on the 2x2 identity and the all-ones matrix
  Assignment id{{"M1_1", Rational(1)}, {"M1_2", Rational(0)}, {"M2_1", Rational(0)},
                {"M2_2", Rational(1)}};
  CHECK(eval_term(permutation_indicator(2), id) == Rational(1));
  Assignment ones{{"M1_1", Rational(1)}, {"M1_2", Rational(1)}, {"M2_1", Rational(1)},
                  {"M2_2", Rational(1)}};
  CHECK(eval_term(permutation_indicator(2), ones) == Rational(0));
}

TEST_CASE("leso_leq_rewrite replaces every <= atom") {
  FiniteStructure st;
  st.domain = {"0", "1"};

  SUBCASE("0 <= 1 is witnessed by eps = 1, slack = 1") {
    EsoSentence s = q_cmp(CmpOp::Le, s_const(Rational(0)), s_const(Rational(1)));
    EsoSentence r = leso_leq_rewrite(s);
    auto symbols = existsf_symbols(r);
    REQUIRE(symbols.size() == 2);
    EsoTables tables;
    tables.tables["eps1"] = {0, {{{}, Rational(1)}}};
    tables.tables["slack1"] = {0, {{{}, Rational(1)}}};
    CHECK(eval_eso(r, st, tables));
  }

  SUBCASE("a <= a is witnessed by eps = 1, slack = 0") {
    EsoSentence s = q_existsf(
        "a", 0, q_cmp(CmpOp::Le, s_app("a", {}), s_app("a", {})));
    EsoSentence r = leso_leq_rewrite(s);
    EsoTables tables;
    tables.tables["a"] = {0, {{{}, Rational(2, 7)}}};
    tables.tables["eps1"] = {0, {{{}, Rational(1)}}};
    tables.tables["slack1"] = {0, {{{}, Rational(0)}}};
    CHECK(eval_eso(r, st, tables));
  }

  SUBCASE("1 <= 0 only admits the eps = 0 degeneration on the unit grid") {
    EsoSentence s = q_cmp(CmpOp::Le, s_const(Rational(1)), s_const(Rational(0)));
    EsoSentence r = leso_leq_rewrite(s);
    for (int num = 0; num <= 4; ++num) {
      for (int x = 0; x <= 4; ++x) {
        EsoTables tables;
        tables.tables["eps1"] = {0, {{{}, Rational(num, 4)}}};
        tables.tables["slack1"] = {0, {{{}, Rational(x, 4)}}};
        bool holds = eval_eso(r, st, tables);
        CHECK(holds == (num == 0 && x == 0));
      }
    }
  }
}

TEST_CASE("integer encodings over probabilities") {
  Distribution uniform;
  uniform.vars = {"X"};
  uniform.domain = 2;
  uniform.entries[{0}] = Rational(1, 2);
  uniform.entries[{1}] = Rational(1, 2);
  CHECK(eval_prob_term(encode_integer(4), uniform) == Rational(4));
  CHECK(eval_prob_term(encode_zero(), uniform) == Rational(0));
  CHECK(prob_term_equal(encode_integer(0), encode_zero()));
  // O(log k) size: 1000 should stay well under a hundred nodes
  std::function<long(const ProbTermPtr&)> size = [&](const ProbTermPtr& t) -> long {
    if (!t) return 0;
    return 1 + size(t->a) + size(t->b);
  };
  CHECK(size(encode_integer(1000)) < 100);
  CHECK(eval_prob_term(encode_integer(1000), uniform) == Rational(1000));
}

TEST_CASE("succ18 validation") {
  Succ18Instance inst;
  CHECK_THROWS_AS(validate_succ18(inst), EtrError);
}
