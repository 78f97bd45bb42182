#include "etrforge/decide.hpp"

#include <algorithm>

#include "etrforge/errors.hpp"

namespace etrforge {

Rational l1_norm(const Assignment& a) {
  Rational sum(0);
  for (const auto& [name, value] : a) {
    (void)name;
    sum += value.abs();
  }
  return sum;
}

bool check_witness(const EtrInstance& inst, const Witness& w, long cap) {
  if (w.kind != WitnessKind::AssignmentW)
    fail(Err::KindMismatch, "ETR instances take assignment witnesses, got " + witness_kind_name(w.kind));
  Rational bound;
  if (dialect_l1_bound(inst.dialect, &bound) && l1_norm(w.assignment) > bound) return false;
  return eval_formula(inst.formula, w.assignment, cap);
}

bool check_witness(const ProbSatInstance& inst, const Witness& w, long cap) {
  if (w.kind != WitnessKind::DistributionW)
    fail(Err::KindMismatch,
         "probabilistic instances take distribution witnesses, got " + witness_kind_name(w.kind));
  validate_distribution(w.distribution);
  for (const auto& v : inst.vars)
    if (std::find(w.distribution.vars.begin(), w.distribution.vars.end(), v) ==
        w.distribution.vars.end())
      fail(Err::UnknownVariable, "distribution lacks variable '" + v + "'");
  if (w.distribution.domain != inst.domain)
    fail(Err::KindMismatch, "distribution domain does not match the instance");
  if (inst.small_model_p && !check_small_model(w.distribution, *inst.small_model_p)) return false;
  return eval_prob_formula(inst.formula, w.distribution, cap);
}

bool check_witness(const EsoInstance& inst, const Witness& w, long cap) {
  if (w.kind != WitnessKind::EsoTablesW)
    fail(Err::KindMismatch, "ESO instances take table witnesses, got " + witness_kind_name(w.kind));
  return eval_eso(inst.sentence, inst.structure, w.tables, cap);
}

namespace {

bool is_var(const TermPtr& t, std::string* name) {
  if (t->kind != TermKind::Var || t->var.is_indexed()) return false;
  *name = t->var.base;
  return true;
}

bool is_const(const TermPtr& t, const Rational& v) {
  return t->kind == TermKind::Const && t->value == v;
}

// (eq (var x) (const v)) in either orientation
bool match_var_eq_const(const FormulaPtr& f, const Rational& v, std::string* name) {
  if (f->kind != FormulaKind::Atom || f->op != CmpOp::Eq) return false;
  if (is_var(f->lhs, name) && is_const(f->rhs, v)) return true;
  return is_var(f->rhs, name) && is_const(f->lhs, v);
}

// x - 1 as either (add (var x) (neg (const 1))) or (add (neg (const 1)) (var x))
bool match_var_minus_one(const TermPtr& t, std::string* name) {
  if (t->kind != TermKind::Add) return false;
  auto is_neg_one = [](const TermPtr& u) {
    return (u->kind == TermKind::Neg && is_const(u->a, Rational(1))) ||
           (u->kind == TermKind::Const && u->value == Rational(-1));
  };
  if (is_var(t->a, name) && is_neg_one(t->b)) return true;
  return is_var(t->b, name) && is_neg_one(t->a);
}

// x * (x - 1) = 0 modulo orientation
bool match_booleanity_product(const FormulaPtr& f, std::string* name) {
  if (f->kind != FormulaKind::Atom || f->op != CmpOp::Eq) return false;
  TermPtr prod;
  if (is_const(f->rhs, Rational(0)))
    prod = f->lhs;
  else if (is_const(f->lhs, Rational(0)))
    prod = f->rhs;
  else
    return false;
  if (prod->kind != TermKind::Mul) return false;
  std::string a, b;
  if (is_var(prod->a, &a) && match_var_minus_one(prod->b, &b) && a == b) {
    *name = a;
    return true;
  }
  if (is_var(prod->b, &a) && match_var_minus_one(prod->a, &b) && a == b) {
    *name = a;
    return true;
  }
  return false;
}

void scan_conjuncts(const FormulaPtr& f, std::map<std::string, std::vector<Rational>>& out) {
  if (f->kind == FormulaKind::And) {
    scan_conjuncts(f->f, out);
    scan_conjuncts(f->g, out);
    return;
  }
  std::string name;
  if (f->kind == FormulaKind::Or) {
    std::string a, b;
    if (match_var_eq_const(f->f, Rational(0), &a) && match_var_eq_const(f->g, Rational(1), &b) &&
        a == b) {
      out.emplace(a, std::vector<Rational>{Rational(0), Rational(1)});
      return;
    }
    if (match_var_eq_const(f->f, Rational(1), &a) && match_var_eq_const(f->g, Rational(0), &b) &&
        a == b) {
      out.emplace(a, std::vector<Rational>{Rational(0), Rational(1)});
      return;
    }
    return;
  }
  if (match_booleanity_product(f, &name))
    out.emplace(name, std::vector<Rational>{Rational(0), Rational(1)});
}

}  // namespace

std::map<std::string, std::vector<Rational>> detect_candidates(const EtrInstance& inst) {
  std::map<std::string, std::vector<Rational>> out = inst.candidates;
  std::map<std::string, std::vector<Rational>> detected;
  scan_conjuncts(inst.formula, detected);
  for (auto& [name, values] : detected) out.emplace(name, std::move(values));
  return out;
}

bool brute_force_decide(const EtrInstance& inst, long cap) {
  auto candidates = detect_candidates(inst);
  std::set<std::string> vars = free_vars(inst.formula);
  std::vector<std::pair<std::string, std::vector<Rational>>> grid;
  long space = 1;
  for (const auto& name : vars) {
    auto it = candidates.find(name);
    if (it == candidates.end())
      fail(Err::Undecidable, "variable '" + name +
                                 "' has no Booleanity pattern and no candidate annotation");
    if (it->second.empty()) return false;
    if (space > (1L << 20) / static_cast<long>(it->second.size()))
      fail(Err::TooLarge, "candidate grid beyond 2^20 tuples");
    space *= static_cast<long>(it->second.size());
    grid.emplace_back(name, it->second);
  }
  Assignment a;
  std::function<bool(size_t)> search = [&](size_t i) -> bool {
    if (i == grid.size()) return eval_formula(inst.formula, a, cap);
    for (const auto& v : grid[i].second) {
      a[grid[i].first] = v;
      if (search(i + 1)) return true;
    }
    a.erase(grid[i].first);
    return false;
  };
  return search(0);
}

}  // namespace etrforge
