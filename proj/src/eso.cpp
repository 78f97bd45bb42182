#include "etrforge/eso.hpp"

#include <cmath>

#include "etrforge/errors.hpp"

namespace etrforge {

EsoTermPtr s_const(const Rational& v) {
  EsoTerm t;
  t.kind = EsoTermKind::Const;
  t.value = v;
  return std::make_shared<const EsoTerm>(std::move(t));
}

EsoTermPtr s_app(const std::string& fn, std::vector<std::string> args) {
  EsoTerm t;
  t.kind = EsoTermKind::App;
  t.fn = fn;
  t.args = std::move(args);
  return std::make_shared<const EsoTerm>(std::move(t));
}

static EsoTermPtr s_binary(EsoTermKind kind, EsoTermPtr a, EsoTermPtr b) {
  EsoTerm t;
  t.kind = kind;
  t.a = std::move(a);
  t.b = std::move(b);
  return std::make_shared<const EsoTerm>(std::move(t));
}

EsoTermPtr s_add(EsoTermPtr a, EsoTermPtr b) { return s_binary(EsoTermKind::Add, std::move(a), std::move(b)); }
EsoTermPtr s_sub(EsoTermPtr a, EsoTermPtr b) { return s_binary(EsoTermKind::Sub, std::move(a), std::move(b)); }
EsoTermPtr s_mul(EsoTermPtr a, EsoTermPtr b) { return s_binary(EsoTermKind::Mul, std::move(a), std::move(b)); }

EsoTermPtr s_sum(const std::string& binder, EsoTermPtr body) {
  EsoTerm t;
  t.kind = EsoTermKind::Sum;
  t.binder = binder;
  t.a = std::move(body);
  return std::make_shared<const EsoTerm>(std::move(t));
}

bool eso_term_equal(const EsoTermPtr& a, const EsoTermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case EsoTermKind::Const:
      return a->value == b->value;
    case EsoTermKind::App:
      return a->fn == b->fn && a->args == b->args;
    case EsoTermKind::Add:
    case EsoTermKind::Sub:
    case EsoTermKind::Mul:
      return eso_term_equal(a->a, b->a) && eso_term_equal(a->b, b->b);
    case EsoTermKind::Sum:
      return a->binder == b->binder && eso_term_equal(a->a, b->a);
  }
  return false;
}

EsoFormulaPtr q_vareq(const std::string& x, const std::string& y, bool negated) {
  EsoFormula f;
  f.kind = EsoFormulaKind::VarEq;
  f.negated = negated;
  f.x = x;
  f.y = y;
  return std::make_shared<const EsoFormula>(std::move(f));
}

EsoFormulaPtr q_rel(const std::string& rel, std::vector<std::string> args, bool negated) {
  EsoFormula f;
  f.kind = EsoFormulaKind::Rel;
  f.negated = negated;
  f.rel = rel;
  f.args = std::move(args);
  return std::make_shared<const EsoFormula>(std::move(f));
}

EsoFormulaPtr q_cmp(CmpOp op, EsoTermPtr lhs, EsoTermPtr rhs, bool negated) {
  EsoFormula f;
  f.kind = EsoFormulaKind::Cmp;
  f.negated = negated;
  f.op = op;
  f.lhs = std::move(lhs);
  f.rhs = std::move(rhs);
  return std::make_shared<const EsoFormula>(std::move(f));
}

static EsoFormulaPtr q_binary(EsoFormulaKind kind, EsoFormulaPtr f, EsoFormulaPtr g) {
  EsoFormula r;
  r.kind = kind;
  r.f = std::move(f);
  r.g = std::move(g);
  return std::make_shared<const EsoFormula>(std::move(r));
}

EsoFormulaPtr q_and(EsoFormulaPtr f, EsoFormulaPtr g) { return q_binary(EsoFormulaKind::And, std::move(f), std::move(g)); }
EsoFormulaPtr q_or(EsoFormulaPtr f, EsoFormulaPtr g) { return q_binary(EsoFormulaKind::Or, std::move(f), std::move(g)); }

EsoFormulaPtr q_and_all(const std::vector<EsoFormulaPtr>& fs) {
  if (fs.empty()) fail(Err::IllFormed, "empty conjunction");
  EsoFormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = q_and(acc, fs[i]);
  return acc;
}

static EsoFormulaPtr q_quant(EsoFormulaKind kind, const std::string& var, EsoFormulaPtr f) {
  EsoFormula r;
  r.kind = kind;
  r.var = var;
  r.f = std::move(f);
  return std::make_shared<const EsoFormula>(std::move(r));
}

EsoFormulaPtr q_exists(const std::string& var, EsoFormulaPtr f) {
  return q_quant(EsoFormulaKind::Exists, var, std::move(f));
}

EsoFormulaPtr q_forall(const std::string& var, EsoFormulaPtr f) {
  return q_quant(EsoFormulaKind::Forall, var, std::move(f));
}

EsoFormulaPtr q_existsf(const std::string& fn, int arity, EsoFormulaPtr f) {
  if (arity < 0) fail(Err::IllFormed, "negative arity");
  EsoFormula r;
  r.kind = EsoFormulaKind::ExistsF;
  r.var = fn;
  r.arity = arity;
  r.f = std::move(f);
  return std::make_shared<const EsoFormula>(std::move(r));
}

bool eso_formula_equal(const EsoFormulaPtr& a, const EsoFormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->negated != b->negated) return false;
  switch (a->kind) {
    case EsoFormulaKind::VarEq:
      return a->x == b->x && a->y == b->y;
    case EsoFormulaKind::Rel:
      return a->rel == b->rel && a->args == b->args;
    case EsoFormulaKind::Cmp:
      return a->op == b->op && eso_term_equal(a->lhs, b->lhs) && eso_term_equal(a->rhs, b->rhs);
    case EsoFormulaKind::And:
    case EsoFormulaKind::Or:
      return eso_formula_equal(a->f, b->f) && eso_formula_equal(a->g, b->g);
    case EsoFormulaKind::Exists:
    case EsoFormulaKind::Forall:
      return a->var == b->var && eso_formula_equal(a->f, b->f);
    case EsoFormulaKind::ExistsF:
      return a->var == b->var && a->arity == b->arity && eso_formula_equal(a->f, b->f);
  }
  return false;
}

int FiniteStructure::atom_position(const std::string& name) const {
  for (size_t i = 0; i < domain.size(); ++i)
    if (domain[i] == name) return static_cast<int>(i);
  return -1;
}

void validate_structure(const FiniteStructure& s) {
  if (s.domain.empty()) fail(Err::IllFormed, "structure domain is empty");
  std::set<std::string> seen(s.domain.begin(), s.domain.end());
  if (seen.size() != s.domain.size()) fail(Err::IllFormed, "duplicate domain atom");
  long n = static_cast<long>(s.domain.size());
  for (const auto& [name, rel] : s.relations) {
    for (const auto& tup : rel.tuples) {
      if (static_cast<int>(tup.size()) != rel.arity)
        fail(Err::IllFormed, "relation '" + name + "' tuple arity mismatch");
      for (int v : tup)
        if (v < 0 || v >= n) fail(Err::IllFormed, "relation '" + name + "' tuple out of domain");
    }
  }
  for (const auto& [name, fn] : s.functions) {
    double expect = std::pow(static_cast<double>(n), fn.arity);
    if (static_cast<double>(fn.values.size()) != expect)
      fail(Err::IllFormed, "function '" + name + "' table is not total");
    for (const auto& [tup, val] : fn.values) {
      (void)val;
      if (static_cast<int>(tup.size()) != fn.arity)
        fail(Err::IllFormed, "function '" + name + "' tuple arity mismatch");
      for (int v : tup)
        if (v < 0 || v >= n) fail(Err::IllFormed, "function '" + name + "' tuple out of domain");
    }
  }
}

namespace {

void collect_existsf(const EsoFormulaPtr& f, std::map<std::string, int>& out) {
  if (!f) return;
  if (f->kind == EsoFormulaKind::ExistsF) out[f->var] = f->arity;
  collect_existsf(f->f, out);
  collect_existsf(f->g, out);
}

}  // namespace

std::map<std::string, int> existsf_symbols(const EsoSentence& s) {
  std::map<std::string, int> out;
  collect_existsf(s, out);
  return out;
}

}  // namespace etrforge
