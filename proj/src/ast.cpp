#include "etrforge/ast.hpp"

#include <algorithm>
#include <sstream>

#include "etrforge/errors.hpp"

namespace etrforge {

namespace {

TermPtr make_term(Term t) { return std::make_shared<const Term>(std::move(t)); }

}  // namespace

TermPtr t_const(const Rational& v) {
  Term t;
  t.kind = TermKind::Const;
  t.value = v;
  return make_term(std::move(t));
}

TermPtr t_int(long k) { return t_const(Rational(k)); }

TermPtr t_var(const std::string& name) {
  Term t;
  t.kind = TermKind::Var;
  t.var.base = name;
  return make_term(std::move(t));
}

TermPtr t_ivar(const std::string& base, std::vector<TermPtr> index) {
  if (index.empty()) fail(Err::IllFormed, "indexed variable '" + base + "' needs at least one index");
  Term t;
  t.kind = TermKind::Var;
  t.var.base = base;
  t.var.index = std::move(index);
  return make_term(std::move(t));
}

TermPtr t_neg(TermPtr a) {
  Term t;
  t.kind = TermKind::Neg;
  t.a = std::move(a);
  return make_term(std::move(t));
}

TermPtr t_add(TermPtr a, TermPtr b) {
  Term t;
  t.kind = TermKind::Add;
  t.a = std::move(a);
  t.b = std::move(b);
  return make_term(std::move(t));
}

TermPtr t_sub(TermPtr a, TermPtr b) { return t_add(std::move(a), t_neg(std::move(b))); }

TermPtr t_mul(TermPtr a, TermPtr b) {
  Term t;
  t.kind = TermKind::Mul;
  t.a = std::move(a);
  t.b = std::move(b);
  return make_term(std::move(t));
}

static TermPtr make_binder(TermKind kind, const std::string& binder, int domain, TermPtr body) {
  if (domain < 2) fail(Err::IllFormed, "binder domain must be at least 2");
  Term t;
  t.kind = kind;
  t.binder = binder;
  t.domain = domain;
  t.a = std::move(body);
  return make_term(std::move(t));
}

TermPtr t_sum(const std::string& binder, int domain, TermPtr body) {
  return make_binder(TermKind::Sum, binder, domain, std::move(body));
}

TermPtr t_prod(const std::string& binder, int domain, TermPtr body) {
  return make_binder(TermKind::Prod, binder, domain, std::move(body));
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Const:
      return a->value == b->value;
    case TermKind::Var: {
      if (a->var.base != b->var.base) return false;
      if (a->var.index.size() != b->var.index.size()) return false;
      for (size_t i = 0; i < a->var.index.size(); ++i)
        if (!term_equal(a->var.index[i], b->var.index[i])) return false;
      return true;
    }
    case TermKind::Neg:
      return term_equal(a->a, b->a);
    case TermKind::Add:
    case TermKind::Mul:
      return term_equal(a->a, b->a) && term_equal(a->b, b->b);
    case TermKind::Sum:
    case TermKind::Prod:
      return a->binder == b->binder && a->domain == b->domain && term_equal(a->a, b->a);
  }
  return false;
}

FormulaPtr f_atom(CmpOp op, TermPtr lhs, TermPtr rhs) {
  BoolFormula f;
  f.kind = FormulaKind::Atom;
  f.op = op;
  f.lhs = std::move(lhs);
  f.rhs = std::move(rhs);
  return std::make_shared<const BoolFormula>(std::move(f));
}

FormulaPtr f_lt(TermPtr lhs, TermPtr rhs) { return f_atom(CmpOp::Lt, std::move(lhs), std::move(rhs)); }
FormulaPtr f_le(TermPtr lhs, TermPtr rhs) { return f_atom(CmpOp::Le, std::move(lhs), std::move(rhs)); }
FormulaPtr f_eq(TermPtr lhs, TermPtr rhs) { return f_atom(CmpOp::Eq, std::move(lhs), std::move(rhs)); }

FormulaPtr f_not(FormulaPtr f) {
  BoolFormula r;
  r.kind = FormulaKind::Not;
  r.f = std::move(f);
  return std::make_shared<const BoolFormula>(std::move(r));
}

static FormulaPtr f_binary(FormulaKind kind, FormulaPtr f, FormulaPtr g) {
  BoolFormula r;
  r.kind = kind;
  r.f = std::move(f);
  r.g = std::move(g);
  return std::make_shared<const BoolFormula>(std::move(r));
}

FormulaPtr f_and(FormulaPtr f, FormulaPtr g) { return f_binary(FormulaKind::And, std::move(f), std::move(g)); }
FormulaPtr f_or(FormulaPtr f, FormulaPtr g) { return f_binary(FormulaKind::Or, std::move(f), std::move(g)); }

FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) fail(Err::IllFormed, "empty conjunction");
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
  return acc;
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Atom:
      return a->op == b->op && term_equal(a->lhs, b->lhs) && term_equal(a->rhs, b->rhs);
    case FormulaKind::Not:
      return formula_equal(a->f, b->f);
    case FormulaKind::And:
    case FormulaKind::Or:
      return formula_equal(a->f, b->f) && formula_equal(a->g, b->g);
  }
  return false;
}

std::string dialect_name(Dialect d) {
  switch (d) {
    case Dialect::Etr: return "etr";
    case Dialect::SigmaEtr: return "sigma-etr";
    case Dialect::PiEtr: return "pi-etr";
    case Dialect::SigmaPiEtr: return "sigma-pi-etr";
    case Dialect::SigmaViEtr: return "sigma-vi-etr";
    case Dialect::SigmaViEtr1: return "sigma-vi-etr-1";
    case Dialect::SigmaEtrHalf: return "sigma-etr-half";
  }
  return "?";
}

Dialect dialect_from_name(const std::string& name) {
  for (Dialect d : {Dialect::Etr, Dialect::SigmaEtr, Dialect::PiEtr, Dialect::SigmaPiEtr,
                    Dialect::SigmaViEtr, Dialect::SigmaViEtr1, Dialect::SigmaEtrHalf})
    if (dialect_name(d) == name) return d;
  fail(Err::SyntaxError, "unknown dialect '" + name + "'");
}

bool dialect_allows_sum(Dialect d) { return d != Dialect::Etr && d != Dialect::PiEtr; }

bool dialect_allows_prod(Dialect d) { return d == Dialect::PiEtr || d == Dialect::SigmaPiEtr; }

bool dialect_allows_indexing(Dialect d) {
  return d == Dialect::SigmaViEtr || d == Dialect::SigmaViEtr1;
}

bool dialect_l1_bound(Dialect d, Rational* bound) {
  if (d == Dialect::SigmaViEtr1) {
    if (bound) *bound = Rational(1);
    return true;
  }
  if (d == Dialect::SigmaEtrHalf) {
    if (bound) *bound = Rational(1, 2);
    return true;
  }
  return false;
}

std::string canonical_indexed_name(const std::string& base, const std::vector<int>& bits) {
  std::string s = base;
  s += '[';
  for (int b : bits) s += static_cast<char>('0' + b);
  s += ']';
  return s;
}

TermPtr substitute(const TermPtr& t, const std::string& binder, long value) {
  switch (t->kind) {
    case TermKind::Const:
      return t;
    case TermKind::Var: {
      if (!t->var.is_indexed()) {
        if (t->var.base == binder) return t_int(value);
        return t;
      }
      bool changed = false;
      std::vector<TermPtr> idx;
      idx.reserve(t->var.index.size());
      for (const auto& e : t->var.index) {
        TermPtr r = substitute(e, binder, value);
        changed |= (r != e);
        idx.push_back(std::move(r));
      }
      if (!changed) return t;
      return t_ivar(t->var.base, std::move(idx));
    }
    case TermKind::Neg: {
      TermPtr a = substitute(t->a, binder, value);
      return a == t->a ? t : t_neg(std::move(a));
    }
    case TermKind::Add:
    case TermKind::Mul: {
      TermPtr a = substitute(t->a, binder, value);
      TermPtr b = substitute(t->b, binder, value);
      if (a == t->a && b == t->b) return t;
      return t->kind == TermKind::Add ? t_add(std::move(a), std::move(b))
                                      : t_mul(std::move(a), std::move(b));
    }
    case TermKind::Sum:
    case TermKind::Prod: {
      if (t->binder == binder) return t;  // shadowed; cannot occur in valid terms
      TermPtr a = substitute(t->a, binder, value);
      if (a == t->a) return t;
      return t->kind == TermKind::Sum ? t_sum(t->binder, t->domain, std::move(a))
                                      : t_prod(t->binder, t->domain, std::move(a));
    }
  }
  return t;
}

FormulaPtr substitute(const FormulaPtr& f, const std::string& binder, long value) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      TermPtr l = substitute(f->lhs, binder, value);
      TermPtr r = substitute(f->rhs, binder, value);
      if (l == f->lhs && r == f->rhs) return f;
      return f_atom(f->op, std::move(l), std::move(r));
    }
    case FormulaKind::Not: {
      FormulaPtr a = substitute(f->f, binder, value);
      return a == f->f ? f : f_not(std::move(a));
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      FormulaPtr a = substitute(f->f, binder, value);
      FormulaPtr b = substitute(f->g, binder, value);
      if (a == f->f && b == f->g) return f;
      return f->kind == FormulaKind::And ? f_and(std::move(a), std::move(b))
                                         : f_or(std::move(a), std::move(b));
    }
  }
  return f;
}

namespace {

bool contains_indexed(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Const:
      return false;
    case TermKind::Var:
      return t->var.is_indexed();
    case TermKind::Neg:
    case TermKind::Sum:
    case TermKind::Prod:
      return contains_indexed(t->a);
    case TermKind::Add:
    case TermKind::Mul:
      return contains_indexed(t->a) || contains_indexed(t->b);
  }
  return false;
}

// Exact evaluation of an index term under concrete binder values. Index terms
// are tiny by construction, so plain recursion is enough here.
Rational eval_closed(const TermPtr& t, const std::map<std::string, long>& env) {
  switch (t->kind) {
    case TermKind::Const:
      return t->value;
    case TermKind::Var: {
      if (t->var.is_indexed())
        fail(Err::DialectViolation, "indexed variable '" + t->var.base + "' inside an index position");
      auto it = env.find(t->var.base);
      if (it == env.end())
        fail(Err::DialectViolation,
             "index refers to '" + t->var.base + "' which is not an enclosing summation binder");
      return Rational(it->second);
    }
    case TermKind::Neg:
      return -eval_closed(t->a, env);
    case TermKind::Add:
      return eval_closed(t->a, env) + eval_closed(t->b, env);
    case TermKind::Mul:
      return eval_closed(t->a, env) * eval_closed(t->b, env);
    case TermKind::Sum:
    case TermKind::Prod: {
      Rational acc = (t->kind == TermKind::Sum) ? Rational(0) : Rational(1);
      for (int v = 0; v < t->domain; ++v) {
        auto inner = env;
        inner[t->binder] = v;
        Rational x = eval_closed(t->a, inner);
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

int resolve_index_bit(const TermPtr& t, const std::map<std::string, long>& env) {
  Rational v = eval_closed(t, env);
  if (v == Rational(0)) return 0;
  if (v == Rational(1)) return 1;
  fail(Err::DialectViolation, "index term evaluates to " + v.str() + ", expected 0 or 1");
}

void free_vars_rec(const TermPtr& t, std::map<std::string, long>& env,
                   std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Const:
      return;
    case TermKind::Var: {
      if (!t->var.is_indexed()) {
        if (!env.count(t->var.base) && !bound.count(t->var.base)) out.insert(t->var.base);
        return;
      }
      std::vector<int> bits;
      bits.reserve(t->var.index.size());
      for (const auto& e : t->var.index) bits.push_back(resolve_index_bit(e, env));
      out.insert(canonical_indexed_name(t->var.base, bits));
      return;
    }
    case TermKind::Neg:
      free_vars_rec(t->a, env, bound, out);
      return;
    case TermKind::Add:
    case TermKind::Mul:
      free_vars_rec(t->a, env, bound, out);
      free_vars_rec(t->b, env, bound, out);
      return;
    case TermKind::Sum:
    case TermKind::Prod: {
      if (contains_indexed(t->a)) {
        // Fork over the binder range so indices below resolve to bits.
        for (int v = 0; v < t->domain; ++v) {
          env[t->binder] = v;
          free_vars_rec(t->a, env, bound, out);
        }
        env.erase(t->binder);
      } else {
        bool fresh = bound.insert(t->binder).second;
        free_vars_rec(t->a, env, bound, out);
        if (fresh) bound.erase(t->binder);
      }
      return;
    }
  }
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> out;
  std::map<std::string, long> env;
  std::set<std::string> bound;
  free_vars_rec(t, env, bound, out);
  return out;
}

std::set<std::string> free_vars(const FormulaPtr& f) {
  std::set<std::string> out;
  switch (f->kind) {
    case FormulaKind::Atom: {
      auto l = free_vars(f->lhs);
      auto r = free_vars(f->rhs);
      out.insert(l.begin(), l.end());
      out.insert(r.begin(), r.end());
      return out;
    }
    case FormulaKind::Not:
      return free_vars(f->f);
    case FormulaKind::And:
    case FormulaKind::Or: {
      auto a = free_vars(f->f);
      auto b = free_vars(f->g);
      a.insert(b.begin(), b.end());
      return a;
    }
  }
  return out;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v << "\n";
  return os.str();
}

namespace {

void collect_syntactic_names(const TermPtr& t, std::set<std::string> bound,
                             std::set<std::string>& out, bool* saw_indexed) {
  switch (t->kind) {
    case TermKind::Const:
      return;
    case TermKind::Var:
      if (t->var.is_indexed()) {
        if (saw_indexed) *saw_indexed = true;
        return;
      }
      if (!bound.count(t->var.base)) out.insert(t->var.base);
      return;
    case TermKind::Neg:
      collect_syntactic_names(t->a, std::move(bound), out, saw_indexed);
      return;
    case TermKind::Add:
    case TermKind::Mul:
      collect_syntactic_names(t->a, bound, out, saw_indexed);
      collect_syntactic_names(t->b, std::move(bound), out, saw_indexed);
      return;
    case TermKind::Sum:
    case TermKind::Prod:
      bound.insert(t->binder);
      collect_syntactic_names(t->a, std::move(bound), out, saw_indexed);
      return;
  }
}

struct DialectChecker {
  Dialect dialect;
  std::vector<std::string> violations;

  void check_term(const TermPtr& t, std::vector<std::string>& binders) {
    switch (t->kind) {
      case TermKind::Const:
        return;
      case TermKind::Var: {
        if (!t->var.is_indexed()) return;
        if (!dialect_allows_indexing(dialect)) {
          violations.push_back("indexed variable '" + t->var.base +
                               "' is not allowed in dialect " + dialect_name(dialect));
        }
        for (const auto& e : t->var.index) {
          bool nested_indexed = false;
          std::set<std::string> names;
          collect_syntactic_names(e, {}, names, &nested_indexed);
          if (nested_indexed)
            violations.push_back("indexed variable inside an index of '" + t->var.base + "'");
          for (const auto& n : names) {
            if (std::find(binders.begin(), binders.end(), n) == binders.end())
              violations.push_back("index of '" + t->var.base + "' refers to '" + n +
                                   "' which is not an enclosing summation binder");
          }
        }
        return;
      }
      case TermKind::Neg:
        check_term(t->a, binders);
        return;
      case TermKind::Add:
      case TermKind::Mul:
        check_term(t->a, binders);
        check_term(t->b, binders);
        return;
      case TermKind::Sum:
      case TermKind::Prod: {
        bool is_sum = t->kind == TermKind::Sum;
        if (is_sum && !dialect_allows_sum(dialect))
          violations.push_back("summation binder '" + t->binder + "' is not allowed in dialect " +
                               dialect_name(dialect));
        if (!is_sum && !dialect_allows_prod(dialect))
          violations.push_back("product binder '" + t->binder + "' is not allowed in dialect " +
                               dialect_name(dialect));
        if (t->domain != 2)
          violations.push_back("binder '" + t->binder + "' has domain " +
                               std::to_string(t->domain) + ", expected 2");
        if (std::find(binders.begin(), binders.end(), t->binder) != binders.end())
          violations.push_back("binder '" + t->binder + "' shadows an enclosing binder");
        binders.push_back(t->binder);
        check_term(t->a, binders);
        binders.pop_back();
        return;
      }
    }
  }

  void check_formula(const FormulaPtr& f) {
    switch (f->kind) {
      case FormulaKind::Atom: {
        std::vector<std::string> binders;
        check_term(f->lhs, binders);
        binders.clear();
        check_term(f->rhs, binders);
        return;
      }
      case FormulaKind::Not:
        check_formula(f->f);
        return;
      case FormulaKind::And:
      case FormulaKind::Or:
        check_formula(f->f);
        check_formula(f->g);
        return;
    }
  }
};

}  // namespace

ValidationReport validate_dialect(const EtrInstance& inst) {
  DialectChecker checker{inst.dialect, {}};
  if (!inst.formula) {
    checker.violations.push_back("instance has no formula");
  } else {
    checker.check_formula(inst.formula);
  }
  return ValidationReport{std::move(checker.violations)};
}

namespace {

void check_qbf_matrix(const FormulaPtr& f, const std::set<std::string>& vars) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      bool shape_ok = f->op == CmpOp::Eq && f->lhs->kind == TermKind::Var &&
                      !f->lhs->var.is_indexed() && f->rhs->kind == TermKind::Const &&
                      f->rhs->value == Rational(1);
      if (!shape_ok)
        fail(Err::IllFormed, "QBF matrix atoms must have the shape (eq (var x) (const 1))");
      if (!vars.count(f->lhs->var.base))
        fail(Err::IllFormed, "QBF matrix variable '" + f->lhs->var.base + "' is not quantified");
      return;
    }
    case FormulaKind::Not:
      check_qbf_matrix(f->f, vars);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      check_qbf_matrix(f->f, vars);
      check_qbf_matrix(f->g, vars);
      return;
  }
}

}  // namespace

void validate_qbf(const QbfInstance& q) {
  std::set<std::string> vars;
  for (const auto& [quant, name] : q.prefix) {
    (void)quant;
    if (!vars.insert(name).second)
      fail(Err::IllFormed, "QBF variable '" + name + "' is quantified twice");
  }
  if (!q.matrix) fail(Err::IllFormed, "QBF has no matrix");
  check_qbf_matrix(q.matrix, vars);
}

namespace {

void collect_bases_term(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Const:
      return;
    case TermKind::Var: {
      out.insert(t->var.base);
      auto bracket = t->var.base.find('[');
      if (bracket != std::string::npos) out.insert(t->var.base.substr(0, bracket));
      for (const auto& e : t->var.index) collect_bases_term(e, out);
      return;
    }
    case TermKind::Neg:
      collect_bases_term(t->a, out);
      return;
    case TermKind::Add:
    case TermKind::Mul:
      collect_bases_term(t->a, out);
      collect_bases_term(t->b, out);
      return;
    case TermKind::Sum:
    case TermKind::Prod:
      out.insert(t->binder);
      collect_bases_term(t->a, out);
      return;
  }
}

}  // namespace

std::set<std::string> collect_name_bases(const FormulaPtr& f) {
  std::set<std::string> out;
  switch (f->kind) {
    case FormulaKind::Atom:
      collect_bases_term(f->lhs, out);
      collect_bases_term(f->rhs, out);
      return out;
    case FormulaKind::Not:
      return collect_name_bases(f->f);
    case FormulaKind::And:
    case FormulaKind::Or: {
      auto a = collect_name_bases(f->f);
      auto b = collect_name_bases(f->g);
      a.insert(b.begin(), b.end());
      return a;
    }
  }
  return out;
}

std::string fresh_name(const std::string& hint, const std::set<std::string>& taken) {
  std::string name = hint;
  while (taken.count(name)) name += "_";
  return name;
}

}  // namespace etrforge
