#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/textio.hpp"

using namespace etrforge;

namespace {

// Independent oracle: evaluate by full substitution of every binder, no
// memoization, no sharing tricks.
Rational naive_eval(const TermPtr& t, const Assignment& a) {
  switch (t->kind) {
    case TermKind::Const:
      return t->value;
    case TermKind::Var: {
      if (!t->var.is_indexed()) {
        auto it = a.find(t->var.base);
        REQUIRE(it != a.end());
        return it->second;
      }
      std::vector<int> bits;
      for (const auto& e : t->var.index) {
        Rational v = naive_eval(e, a);
        REQUIRE((v == Rational(0) || v == Rational(1)));
        bits.push_back(v == Rational(1) ? 1 : 0);
      }
      auto it = a.find(canonical_indexed_name(t->var.base, bits));
      REQUIRE(it != a.end());
      return it->second;
    }
    case TermKind::Neg:
      return -naive_eval(t->a, a);
    case TermKind::Add:
      return naive_eval(t->a, a) + naive_eval(t->b, a);
    case TermKind::Mul:
      return naive_eval(t->a, a) * naive_eval(t->b, a);
    case TermKind::Sum:
    case TermKind::Prod: {
      Rational acc = t->kind == TermKind::Sum ? Rational(0) : Rational(1);
      for (int v = 0; v < t->domain; ++v) {
        Rational x = naive_eval(substitute(t->a, t->binder, v), a);
        if (t->kind == TermKind::Sum)
          acc += x;
        else
          acc *= x;
      }
      return acc;
    }
  }
  return Rational(0);
}

TermPtr rnd_term(std::mt19937_64& rng, int depth, int binders_left,
                 std::vector<std::string>& scope) {
  if (depth == 0 || rng() % 3 == 0) {
    switch (rng() % 3) {
      case 0:
        return t_int(static_cast<long>(rng() % 4) - 1);
      case 1:
        if (!scope.empty()) return t_var(scope[rng() % scope.size()]);
        return t_var("x");
      default:
        return t_var("x");
    }
  }
  switch (rng() % 4) {
    case 0:
      return t_neg(rnd_term(rng, depth - 1, binders_left, scope));
    case 1:
      return t_add(rnd_term(rng, depth - 1, binders_left, scope),
                   rnd_term(rng, depth - 1, binders_left, scope));
    case 2:
      return t_mul(rnd_term(rng, depth - 1, binders_left, scope),
                   rnd_term(rng, depth - 1, binders_left, scope));
    default: {
      if (binders_left == 0) return t_var("x");
      std::string name = "e" + std::to_string(scope.size() + 1);
      scope.push_back(name);
      TermPtr body = rnd_term(rng, depth - 1, binders_left - 1, scope);
      scope.pop_back();
      return rng() % 2 ? t_sum(name, 2, body) : t_prod(name, 2, body);
    }
  }
}

}  // namespace

TEST_CASE("summation and product semantics") {
  // sum_e 1 over {0,1} = 2
  CHECK(eval_term(t_sum("e", 2, t_int(1)), {}) == Rational(2));
  // prod_e (1 + e) = (1+0)(1+1) = 2
  CHECK(eval_term(t_prod("e", 2, t_add(t_int(1), t_var("e"))), {}) == Rational(2));
}

TEST_CASE("the co-Sat sum evaluates to zero") {
  // sum_{x1} sum_{x2} (x1+x2)(x1+(1-x2))(1-x1) = 0
  TermPtr x1 = t_var("x1"), x2 = t_var("x2");
  TermPtr body = t_mul(t_mul(t_add(x1, x2), t_add(x1, t_sub(t_int(1), x2))), t_sub(t_int(1), x1));
  TermPtr sum = t_sum("x1", 2, t_sum("x2", 2, body));
  CHECK(eval_term(sum, {}) == Rational(0));
  CHECK(eval_formula(f_eq(sum, t_int(0)), {}));
}

TEST_CASE("comparisons are exact") {
  CHECK_FALSE(eval_formula(f_lt(t_int(1), t_int(0)), {}));
  CHECK(eval_formula(f_lt(t_const(Rational(1, 3)), t_const(Rational(34, 100)) ), {}));
  CHECK_FALSE(eval_formula(f_lt(t_const(Rational(1, 3)), t_const(Rational(33, 100))), {}));
}

TEST_CASE("unit vector sentence under the canonical witness") {
  // sum_{e1} sum_{e2} (x_<e1,e2>)^2 = 1 with x[00] = 1, the rest 0
  TermPtr iv = t_ivar("x", {t_var("e1"), t_var("e2")});
  TermPtr sum = t_sum("e1", 2, t_sum("e2", 2, t_mul(iv, iv)));
  Assignment a{{"x[00]", Rational(1)}, {"x[01]", Rational(0)}, {"x[10]", Rational(0)},
               {"x[11]", Rational(0)}};
  CHECK(eval_formula(f_eq(sum, t_int(1)), a));
  a["x[01]"] = Rational(1, 2);
  CHECK_FALSE(eval_formula(f_eq(sum, t_int(1)), a));
}

TEST_CASE("unbound variables and caps are rejected") {
  CHECK_THROWS_AS(eval_term(t_var("nope"), {}), EtrError);
  // a body depending on every enclosing binder defeats memoization, so the
  // full 2^20 expansion runs into a small cap
  TermPtr body = t_var("e1");
  for (int i = 2; i <= 20; ++i) body = t_mul(body, t_var("e" + std::to_string(i)));
  TermPtr t = body;
  for (int i = 1; i <= 20; ++i) t = t_sum("e" + std::to_string(i), 2, t);
  CHECK_THROWS_AS(eval_term(t, {}, 1000), EtrError);
}

TEST_CASE("memoization matches full expansion on random terms") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 120; ++round) {
    std::vector<std::string> scope;
    TermPtr t = rnd_term(rng, 5, 10, scope);
    Assignment a{{"x", Rational(static_cast<long>(rng() % 19) - 9,
                                static_cast<long>(rng() % 9) + 1)}};
    CHECK(eval_term(t, a) == naive_eval(t, a));
  }
}

TEST_CASE("memoization makes wide closed sums cheap") {
  // sum over 40 binders of the constant 1 = 2^40; naive expansion would be
  // astronomically beyond the cap
  TermPtr t = t_int(1);
  for (int i = 1; i <= 40; ++i) t = t_sum("e" + std::to_string(i), 2, t);
  CHECK(eval_term(t, {}, 1 << 16) == Rational(mpq_class(mpz_class(1) << 40)));
}

TEST_CASE("qbf truth by brute force") {
  auto atom = [](const std::string& v) { return f_eq(t_var(v), t_int(1)); };
  QbfInstance q;
  q.prefix = {{Quant::Forall, "x"}};
  q.matrix = f_or(atom("x"), f_not(atom("x")));
  CHECK(eval_qbf(q));
  q.matrix = atom("x");
  CHECK_FALSE(eval_qbf(q));
  // exists x forall y (x or y) is true
  q.prefix = {{Quant::Exists, "x"}, {Quant::Forall, "y"}};
  q.matrix = f_or(atom("x"), atom("y"));
  CHECK(eval_qbf(q));
  // guard against huge prefixes
  QbfInstance big;
  for (int i = 0; i < 25; ++i) big.prefix.emplace_back(Quant::Exists, "v" + std::to_string(i));
  big.matrix = atom("v0");
  CHECK_THROWS_AS(eval_qbf(big), EtrError);
}

TEST_CASE("probabilistic semantics") {
  Distribution uniform;
  uniform.vars = {"X", "Y"};
  uniform.domain = 2;
  uniform.entries[{0, 0}] = Rational(1, 4);
  uniform.entries[{0, 1}] = Rational(1, 4);
  uniform.entries[{1, 0}] = Rational(1, 4);
  uniform.entries[{1, 1}] = Rational(1, 4);

  // P(top) = 1 on every distribution
  CHECK(eval_prob_term(p_prob(e_top()), uniform) == Rational(1));
  // an inconsistent event has probability 0
  CHECK(eval_prob_term(p_prob(e_and(e_eq("X", 0), e_eq("X", 1))), uniform) == Rational(0));
  // sum_x P(Y=1, X=x) = P(Y=1) = 1/2
  ProbTermPtr lhs = p_sum("x", 2, p_prob(e_and(e_eq("Y", 1), e_eq_dummy("X", "x"))));
  CHECK(eval_prob_term(lhs, uniform) == Rational(1, 2));
  CHECK(eval_prob_formula(pf_atom(CmpOp::Eq, lhs, p_prob(e_eq("Y", 1))), uniform));
}

TEST_CASE("probabilistic evaluation is invariant under variable reordering") {
  Distribution d;
  d.vars = {"A", "B"};
  d.domain = 2;
  d.entries[{0, 1}] = Rational(1, 3);
  d.entries[{1, 0}] = Rational(2, 3);
  Distribution swapped;
  swapped.vars = {"B", "A"};
  swapped.domain = 2;
  swapped.entries[{1, 0}] = Rational(1, 3);
  swapped.entries[{0, 1}] = Rational(2, 3);
  ProbFormulaPtr f = pf_atom(CmpOp::Le, p_prob(e_eq("A", 1)),
                             p_sum("t", 2, p_prob(e_and(e_eq("B", 0), e_eq_dummy("A", "t")))));
  CHECK(eval_prob_formula(f, d) == eval_prob_formula(f, swapped));
}

TEST_CASE("distribution validation and support") {
  Distribution d;
  d.vars = {"X"};
  d.domain = 2;
  d.entries[{0}] = Rational(1, 2);
  CHECK_THROWS_AS(validate_distribution(d), EtrError);  // masses sum to 1/2
  d.entries[{1}] = Rational(1, 2);
  CHECK_NOTHROW(validate_distribution(d));
  CHECK(support_size(d) == 2);
  CHECK(check_small_model(d, 2));
  CHECK_FALSE(check_small_model(d, 1));

  Distribution four;
  four.vars = {"X", "Y"};
  four.domain = 2;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) four.entries[{x, y}] = Rational(1, 4);
  CHECK(check_small_model(four, 4));
  CHECK_FALSE(check_small_model(four, 3));
}

TEST_CASE("ESO witness checking") {
  FiniteStructure st;
  st.domain = {"0", "1"};

  // exists f forall x: f(x) = f(x)
  EsoSentence trivial =
      q_existsf("f", 1, q_forall("x", q_cmp(CmpOp::Eq, s_app("f", {"x"}), s_app("f", {"x"}))));
  EsoTables tables;
  tables.tables["f"] = {1, {{{"0"}, Rational(3, 7)}, {{"1"}, Rational(0)}}};
  CHECK(eval_eso(trivial, st, tables));

  // exists m: m + 1 = 0 with the table m = -1
  EsoSentence neg_one =
      q_existsf("m", 0, q_cmp(CmpOp::Eq, s_add(s_app("m", {}), s_const(Rational(1))),
                              s_const(Rational(0))));
  EsoTables neg_tables;
  neg_tables.tables["m"] = {0, {{{}, Rational(-1)}}};
  CHECK(eval_eso(neg_one, st, neg_tables));
  neg_tables.tables["m"] = {0, {{{}, Rational(1)}}};
  CHECK_FALSE(eval_eso(neg_one, st, neg_tables));

  // exists h: h + ... + h (8 times) = 1 with h = 1/8
  EsoTermPtr eight = s_app("h", {});
  for (int i = 1; i < 8; ++i) eight = s_add(eight, s_app("h", {}));
  EsoSentence eighth = q_existsf("h", 0, q_cmp(CmpOp::Eq, eight, s_const(Rational(1))));
  EsoTables h_tables;
  h_tables.tables["h"] = {0, {{{}, Rational(1, 8)}}};
  CHECK(eval_eso(eighth, st, h_tables));

  // missing tables are reported
  EsoTables empty;
  CHECK_THROWS_AS(eval_eso(eighth, st, empty), EtrError);

  // summation ranges over the domain
  FunctionTable w;
  w.arity = 1;
  w.values[{0}] = Rational(1, 4);
  w.values[{1}] = Rational(3, 4);
  st.functions["w"] = w;
  EsoSentence sums = q_cmp(CmpOp::Eq, s_sum("x", s_app("w", {"x"})), s_const(Rational(1)));
  CHECK(eval_eso(sums, st, empty));
}
