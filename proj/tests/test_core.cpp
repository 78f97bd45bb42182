#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "etrforge/ast.hpp"
#include "etrforge/errors.hpp"

using namespace etrforge;

TEST_CASE("rational arithmetic is exact and normalized") {
  Rational a(1, 3), b(1, 6);
  CHECK((a + b) == Rational(1, 2));
  CHECK((a - b) == Rational(1, 6));
  CHECK((a * b) == Rational(1, 18));
  CHECK((a / b) == Rational(2));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-2, 4).str() == "-1/2");
  CHECK(Rational(3, -6) == Rational(-1, 2));  // denominator kept positive
  CHECK(Rational::from_string("7/21") == Rational(1, 3));
  CHECK(Rational::from_string("-5") == Rational(-5));
  CHECK(Rational(1, 3).pow(3) == Rational(1, 27));
  CHECK(pow2(-3) == Rational(1, 8));
  CHECK(pow2(10) == Rational(1024));
  CHECK_THROWS_AS(Rational::from_string("1/0"), EtrError);
  CHECK_THROWS_AS(Rational::from_string("x"), EtrError);
}

TEST_CASE("rational round trip property: (a + b) - b == a") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    Rational a(static_cast<long>(rng() % 2001) - 1000, static_cast<long>(rng() % 999) + 1);
    Rational b(static_cast<long>(rng() % 2001) - 1000, static_cast<long>(rng() % 999) + 1);
    CHECK((a + b) - b == a);
    if (!b.is_zero()) CHECK((a / b) * b == a);
  }
}

TEST_CASE("substitute replaces binder occurrences by constants") {
  // substitute(x + e, e, 1) = x + 1
  TermPtr t = t_add(t_var("x"), t_var("e"));
  TermPtr r = substitute(t, "e", 1);
  CHECK(term_equal(r, t_add(t_var("x"), t_int(1))));

  // substituting an unused binder is the identity
  CHECK(term_equal(substitute(t_var("x"), "e", 0), t_var("x")));

  // substitution reaches index positions
  TermPtr iv = t_ivar("x", {t_var("e")});
  CHECK(term_equal(substitute(iv, "e", 1), t_ivar("x", {t_int(1)})));
}

TEST_CASE("substitute commutes for distinct binders") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 100; ++round) {
    // random small term over x, e1, e2
    std::function<TermPtr(int)> gen = [&](int depth) -> TermPtr {
      if (depth == 0 || rng() % 3 == 0) {
        switch (rng() % 4) {
          case 0: return t_var("x");
          case 1: return t_var("e1");
          case 2: return t_var("e2");
          default: return t_int(static_cast<long>(rng() % 3));
        }
      }
      switch (rng() % 3) {
        case 0: return t_neg(gen(depth - 1));
        case 1: return t_add(gen(depth - 1), gen(depth - 1));
        default: return t_mul(gen(depth - 1), gen(depth - 1));
      }
    };
    TermPtr t = gen(4);
    TermPtr ab = substitute(substitute(t, "e1", 0), "e2", 1);
    TermPtr ba = substitute(substitute(t, "e2", 1), "e1", 0);
    CHECK(term_equal(ab, ba));
  }
}

TEST_CASE("free_vars handles binders and index resolution") {
  // free_vars(sum_e (x + e)) = {x}
  TermPtr t = t_sum("e", 2, t_add(t_var("x"), t_var("e")));
  CHECK(free_vars(t) == std::set<std::string>{"x"});

  CHECK(free_vars(t_int(1)).empty());

  // free_vars(sum_e1 sum_e2 x_<e1,e2>) expands to the four canonical names
  TermPtr iv = t_ivar("x", {t_var("e1"), t_var("e2")});
  TermPtr nested = t_sum("e1", 2, t_sum("e2", 2, iv));
  std::set<std::string> expect{"x[00]", "x[01]", "x[10]", "x[11]"};
  CHECK(free_vars(nested) == expect);

  // unresolvable index
  TermPtr bad = t_ivar("x", {t_var("y")});
  CHECK_THROWS_AS(free_vars(bad), EtrError);
}

TEST_CASE("validate_dialect enforces the operator tables") {
  // product under sigma-etr is a violation
  EtrInstance inst;
  inst.dialect = Dialect::SigmaEtr;
  inst.formula = f_eq(t_prod("e", 2, t_var("x")), t_int(0));
  CHECK_FALSE(validate_dialect(inst).ok());

  // the co-Sat sentence is a valid sigma-etr instance
  TermPtr x1 = t_var("x1"), x2 = t_var("x2");
  TermPtr body = t_mul(t_mul(t_add(x1, x2), t_add(x1, t_sub(t_int(1), x2))), t_sub(t_int(1), x1));
  inst.formula = f_eq(t_sum("x1", 2, t_sum("x2", 2, body)), t_int(0));
  CHECK(validate_dialect(inst).ok());

  // an indexed variable without an enclosing binder for its index
  inst.dialect = Dialect::SigmaViEtr;
  inst.formula = f_eq(t_ivar("x", {t_var("y")}), t_int(0));
  auto report = validate_dialect(inst);
  CHECK_FALSE(report.ok());

  // the same reference under the right binder is fine
  inst.formula = f_eq(t_sum("y", 2, t_ivar("x", {t_var("y")})), t_int(0));
  CHECK(validate_dialect(inst).ok());

  // indexing needs a vi dialect
  inst.dialect = Dialect::SigmaEtr;
  CHECK_FALSE(validate_dialect(inst).ok());

  // shadowed binder names violate the path-distinctness rule
  inst.dialect = Dialect::SigmaEtr;
  inst.formula = f_eq(t_sum("e", 2, t_sum("e", 2, t_var("e"))), t_int(0));
  CHECK_FALSE(validate_dialect(inst).ok());

  // binder domains must be 2 in the ETR dialects
  inst.formula = f_eq(t_sum("e", 3, t_var("e")), t_int(0));
  CHECK_FALSE(validate_dialect(inst).ok());
}

TEST_CASE("qbf validation") {
  QbfInstance q;
  q.prefix = {{Quant::Forall, "x"}};
  q.matrix = f_eq(t_var("x"), t_int(1));
  CHECK_NOTHROW(validate_qbf(q));

  QbfInstance twice = q;
  twice.prefix.push_back({Quant::Exists, "x"});
  CHECK_THROWS_AS(validate_qbf(twice), EtrError);

  QbfInstance freevar = q;
  freevar.matrix = f_eq(t_var("y"), t_int(1));
  CHECK_THROWS_AS(validate_qbf(freevar), EtrError);

  QbfInstance badatom = q;
  badatom.matrix = f_le(t_var("x"), t_int(1));
  CHECK_THROWS_AS(validate_qbf(badatom), EtrError);
}

TEST_CASE("dialect l1 bounds") {
  Rational bound;
  CHECK(dialect_l1_bound(Dialect::SigmaViEtr1, &bound));
  CHECK(bound == Rational(1));
  CHECK(dialect_l1_bound(Dialect::SigmaEtrHalf, &bound));
  CHECK(bound == Rational(1, 2));
  CHECK_FALSE(dialect_l1_bound(Dialect::SigmaEtr, &bound));
}

TEST_CASE("fresh_name avoids collected bases") {
  FormulaPtr f = f_eq(t_add(t_var("t"), t_ivar("u", {t_var("e")})), t_var("t[01]"));
  auto taken = collect_name_bases(f);
  CHECK(taken.count("t"));
  CHECK(taken.count("u"));
  CHECK(taken.count("e"));
  CHECK(taken.count("t[01]"));
  CHECK(fresh_name("t", taken) == "t_");
  CHECK(fresh_name("w", taken) == "w");
}

TEST_CASE("canonical indexed names") {
  CHECK(canonical_indexed_name("x", {0, 1, 1}) == "x[011]");
  CHECK(canonical_indexed_name("q", {}) == "q[]");
}
