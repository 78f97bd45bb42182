#include "etrforge/eval.hpp"

#include <algorithm>
#include <map>
#include <vector>

#include "etrforge/errors.hpp"

namespace etrforge {

namespace {

// Evaluator with per-call memoization. The memo key restricts the binder
// environment to the names a node actually depends on, so summing a closed
// body over k nested binders costs O(k) instead of O(2^k).
class TermEvaluator {
public:
  TermEvaluator(const Assignment& a, long cap) : assignment_(a), budget_(cap) {}

  Rational eval(const TermPtr& t) {
    const auto& d = deps(t.get());
    MemoKey key;
    key.first = t.get();
    for (const auto& name : d) {
      auto it = env_.find(name);
      if (it != env_.end()) key.second.emplace_back(name, it->second);
    }
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    Rational v = compute(t);
    memo_.emplace(std::move(key), v);
    return v;
  }

private:
  using MemoKey = std::pair<const Term*, std::vector<std::pair<std::string, long>>>;

  void spend() {
    if (--budget_ < 0) fail(Err::ExpansionCapExceeded, "binder expansion exceeds the evaluation cap");
  }

  Rational compute(const TermPtr& t) {
    spend();
    switch (t->kind) {
      case TermKind::Const:
        return t->value;
      case TermKind::Var: {
        if (!t->var.is_indexed()) {
          auto b = env_.find(t->var.base);
          if (b != env_.end()) return Rational(b->second);
          auto it = assignment_.find(t->var.base);
          if (it == assignment_.end()) fail(Err::UnboundVariable, "variable '" + t->var.base + "'");
          return it->second;
        }
        std::vector<int> bits;
        bits.reserve(t->var.index.size());
        for (const auto& e : t->var.index) {
          Rational v = eval(e);
          if (v == Rational(0))
            bits.push_back(0);
          else if (v == Rational(1))
            bits.push_back(1);
          else
            fail(Err::ValueOutOfDomain,
                 "index of '" + t->var.base + "' evaluates to " + v.str() + ", expected 0 or 1");
        }
        std::string name = canonical_indexed_name(t->var.base, bits);
        auto it = assignment_.find(name);
        if (it == assignment_.end()) fail(Err::UnboundVariable, "variable '" + name + "'");
        return it->second;
      }
      case TermKind::Neg:
        return -eval(t->a);
      case TermKind::Add:
        return eval(t->a) + eval(t->b);
      case TermKind::Mul:
        return eval(t->a) * eval(t->b);
      case TermKind::Sum:
      case TermKind::Prod: {
        Rational acc = t->kind == TermKind::Sum ? Rational(0) : Rational(1);
        for (int v = 0; v < t->domain; ++v) {
          env_[t->binder] = v;
          Rational x = eval(t->a);
          if (t->kind == TermKind::Sum)
            acc += x;
          else
            acc *= x;
        }
        env_.erase(t->binder);
        return acc;
      }
    }
    fail(Err::IllFormed, "unreachable term kind");
  }

  // Syntactic free direct-variable names of a node (binder references and
  // names inside index positions); cached per node pointer.
  const std::vector<std::string>& deps(const Term* t) {
    auto it = deps_.find(t);
    if (it != deps_.end()) return it->second;
    std::set<std::string> names;
    collect(t, {}, names);
    auto [pos, ignored] = deps_.emplace(t, std::vector<std::string>(names.begin(), names.end()));
    (void)ignored;
    return pos->second;
  }

  static void collect(const Term* t, std::set<std::string> bound, std::set<std::string>& out) {
    switch (t->kind) {
      case TermKind::Const:
        return;
      case TermKind::Var:
        if (!t->var.is_indexed()) {
          if (!bound.count(t->var.base)) out.insert(t->var.base);
        } else {
          for (const auto& e : t->var.index) collect(e.get(), bound, out);
        }
        return;
      case TermKind::Neg:
        collect(t->a.get(), std::move(bound), out);
        return;
      case TermKind::Add:
      case TermKind::Mul:
        collect(t->a.get(), bound, out);
        collect(t->b.get(), std::move(bound), out);
        return;
      case TermKind::Sum:
      case TermKind::Prod:
        bound.insert(t->binder);
        collect(t->a.get(), std::move(bound), out);
        return;
    }
  }

  const Assignment& assignment_;
  long budget_;
  std::map<std::string, long> env_;
  std::map<const Term*, std::vector<std::string>> deps_;
  std::map<MemoKey, Rational> memo_;
};

bool compare(CmpOp op, const Rational& l, const Rational& r) {
  switch (op) {
    case CmpOp::Lt: return l < r;
    case CmpOp::Le: return l <= r;
    case CmpOp::Eq: return l == r;
  }
  return false;
}

bool eval_formula_rec(const FormulaPtr& f, TermEvaluator& ev) {
  switch (f->kind) {
    case FormulaKind::Atom:
      return compare(f->op, ev.eval(f->lhs), ev.eval(f->rhs));
    case FormulaKind::Not:
      return !eval_formula_rec(f->f, ev);
    case FormulaKind::And:
      return eval_formula_rec(f->f, ev) && eval_formula_rec(f->g, ev);
    case FormulaKind::Or:
      return eval_formula_rec(f->f, ev) || eval_formula_rec(f->g, ev);
  }
  return false;
}

}  // namespace

Rational eval_term(const TermPtr& t, const Assignment& a, long cap) {
  TermEvaluator ev(a, cap);
  return ev.eval(t);
}

bool eval_formula(const FormulaPtr& f, const Assignment& a, long cap) {
  TermEvaluator ev(a, cap);
  return eval_formula_rec(f, ev);
}

namespace {

bool eval_qbf_rec(const QbfInstance& q, size_t i, Assignment& a) {
  if (i == q.prefix.size()) return eval_formula(q.matrix, a);
  const auto& [quant, name] = q.prefix[i];
  a[name] = Rational(0);
  bool v0 = eval_qbf_rec(q, i + 1, a);
  if (quant == Quant::Exists && v0) { a.erase(name); return true; }
  if (quant == Quant::Forall && !v0) { a.erase(name); return false; }
  a[name] = Rational(1);
  bool v1 = eval_qbf_rec(q, i + 1, a);
  a.erase(name);
  return v1;
}

}  // namespace

bool eval_qbf(const QbfInstance& q) {
  if (q.prefix.size() > 24) fail(Err::TooLarge, "more than 24 quantifiers");
  validate_qbf(q);
  Assignment a;
  return eval_qbf_rec(q, 0, a);
}

namespace {

class ProbEvaluator {
public:
  ProbEvaluator(const Distribution& m, long cap) : m_(m), budget_(cap) {
    for (size_t i = 0; i < m.vars.size(); ++i) var_pos_[m.vars[i]] = static_cast<int>(i);
  }

  Rational eval(const ProbTermPtr& t) {
    if (--budget_ < 0) fail(Err::ExpansionCapExceeded, "summation expansion exceeds the cap");
    switch (t->kind) {
      case ProbTermKind::Prob: {
        Rational sum(0);
        for (const auto& [tuple, mass] : m_.entries) {
          if (mass.is_zero()) continue;
          if (satisfies(t->event, tuple)) sum += mass;
        }
        return sum;
      }
      case ProbTermKind::Neg:
        return -eval(t->a);
      case ProbTermKind::Add:
        return eval(t->a) + eval(t->b);
      case ProbTermKind::Mul:
        return eval(t->a) * eval(t->b);
      case ProbTermKind::Sum: {
        if (t->domain != m_.domain)
          fail(Err::IllFormed, "summation domain " + std::to_string(t->domain) +
                                   " does not match the distribution domain " +
                                   std::to_string(m_.domain));
        Rational acc(0);
        for (int v = 0; v < t->domain; ++v) {
          env_[t->binder] = v;
          acc += eval(t->a);
        }
        env_.erase(t->binder);
        return acc;
      }
    }
    fail(Err::IllFormed, "unreachable probabilistic term kind");
  }

  bool satisfies(const EventPtr& e, const std::vector<int>& tuple) const {
    switch (e->kind) {
      case EventKind::Top:
        return true;
      case EventKind::AtomEq: {
        auto it = var_pos_.find(e->var);
        if (it == var_pos_.end()) fail(Err::UnknownVariable, "random variable '" + e->var + "'");
        long want;
        if (const long* v = std::get_if<long>(&e->value)) {
          want = *v;
        } else {
          const std::string& dummy = std::get<std::string>(e->value);
          auto d = env_.find(dummy);
          if (d == env_.end()) fail(Err::UnboundVariable, "summation dummy '" + dummy + "'");
          want = d->second;
        }
        if (want < 0 || want >= m_.domain)
          fail(Err::ValueOutOfDomain, "event value " + std::to_string(want) + " for '" + e->var + "'");
        return tuple[it->second] == want;
      }
      case EventKind::Not:
        return !satisfies(e->f, tuple);
      case EventKind::And:
        return satisfies(e->f, tuple) && satisfies(e->g, tuple);
    }
    return false;
  }

private:
  const Distribution& m_;
  long budget_;
  std::map<std::string, int> var_pos_;
  std::map<std::string, long> env_;
};

bool eval_prob_formula_rec(const ProbFormulaPtr& f, ProbEvaluator& ev) {
  switch (f->kind) {
    case ProbFormulaKind::Atom:
      return compare(f->op, ev.eval(f->lhs), ev.eval(f->rhs));
    case ProbFormulaKind::Not:
      return !eval_prob_formula_rec(f->f, ev);
    case ProbFormulaKind::And:
      return eval_prob_formula_rec(f->f, ev) && eval_prob_formula_rec(f->g, ev);
    case ProbFormulaKind::Or:
      return eval_prob_formula_rec(f->f, ev) || eval_prob_formula_rec(f->g, ev);
  }
  return false;
}

}  // namespace

Rational eval_prob_term(const ProbTermPtr& t, const Distribution& m, long cap) {
  ProbEvaluator ev(m, cap);
  return ev.eval(t);
}

bool eval_prob_formula(const ProbFormulaPtr& f, const Distribution& m, long cap) {
  validate_distribution(m);
  ProbEvaluator ev(m, cap);
  return eval_prob_formula_rec(f, ev);
}

namespace {

class EsoEvaluator {
public:
  EsoEvaluator(const FiniteStructure& st, const EsoTables& w, const EsoSentence& s, long cap)
      : st_(st), budget_(cap) {
    n_ = static_cast<long>(st.domain.size());
    auto needed = existsf_symbols(s);
    for (const auto& [name, arity] : needed) {
      auto it = w.tables.find(name);
      if (it == w.tables.end())
        fail(Err::MissingTable, "no witness table for existentially quantified function '" + name + "'");
      if (it->second.arity != arity)
        fail(Err::MissingTable, "witness table for '" + name + "' has arity " +
                                    std::to_string(it->second.arity) + ", sentence declares " +
                                    std::to_string(arity));
      FunctionTable ft;
      ft.arity = arity;
      for (const auto& [key, val] : it->second.entries) {
        std::vector<int> pos;
        pos.reserve(key.size());
        for (const auto& atom : key) {
          int p = st.atom_position(atom);
          if (p < 0) fail(Err::IllFormed, "witness table for '" + name + "' uses unknown atom '" + atom + "'");
          pos.push_back(p);
        }
        if (static_cast<int>(pos.size()) != arity)
          fail(Err::IllFormed, "witness table row arity mismatch for '" + name + "'");
        ft.values[std::move(pos)] = val;
      }
      long cells = 1;
      for (int i = 0; i < arity; ++i) {
        cells *= n_;
        if (cells > cap) fail(Err::TooLarge, "table for '" + name + "' exceeds the cap");
      }
      if (static_cast<long>(ft.values.size()) != cells)
        fail(Err::MissingTable, "witness table for '" + name + "' is not total");
      guessed_[name] = std::move(ft);
    }
  }

  bool eval(const EsoFormulaPtr& f) {
    if (--budget_ < 0) fail(Err::ExpansionCapExceeded, "quantifier expansion exceeds the cap");
    switch (f->kind) {
      case EsoFormulaKind::VarEq: {
        bool v = lookup_var(f->x) == lookup_var(f->y);
        return f->negated ? !v : v;
      }
      case EsoFormulaKind::Rel: {
        auto it = st_.relations.find(f->rel);
        if (it == st_.relations.end()) fail(Err::IllFormed, "unknown relation '" + f->rel + "'");
        std::vector<int> tup;
        tup.reserve(f->args.size());
        for (const auto& v : f->args) tup.push_back(lookup_var(v));
        bool v = it->second.tuples.count(tup) > 0;
        return f->negated ? !v : v;
      }
      case EsoFormulaKind::Cmp: {
        bool v = compare(f->op, eval_term(f->lhs), eval_term(f->rhs));
        return f->negated ? !v : v;
      }
      case EsoFormulaKind::And:
        return eval(f->f) && eval(f->g);
      case EsoFormulaKind::Or:
        return eval(f->f) || eval(f->g);
      case EsoFormulaKind::Exists: {
        for (long v = 0; v < n_; ++v) {
          scope_[f->var] = static_cast<int>(v);
          if (eval(f->f)) {
            scope_.erase(f->var);
            return true;
          }
        }
        scope_.erase(f->var);
        return false;
      }
      case EsoFormulaKind::Forall: {
        for (long v = 0; v < n_; ++v) {
          scope_[f->var] = static_cast<int>(v);
          if (!eval(f->f)) {
            scope_.erase(f->var);
            return false;
          }
        }
        scope_.erase(f->var);
        return true;
      }
      case EsoFormulaKind::ExistsF:
        return eval(f->f);  // interpretation supplied by the witness
    }
    return false;
  }

private:
  int lookup_var(const std::string& name) const {
    auto it = scope_.find(name);
    if (it == scope_.end()) fail(Err::IllFormed, "unbound first-order variable '" + name + "'");
    return it->second;
  }

  Rational eval_term(const EsoTermPtr& t) {
    if (--budget_ < 0) fail(Err::ExpansionCapExceeded, "term expansion exceeds the cap");
    switch (t->kind) {
      case EsoTermKind::Const:
        return t->value;
      case EsoTermKind::App: {
        std::vector<int> tup;
        tup.reserve(t->args.size());
        for (const auto& v : t->args) tup.push_back(lookup_var(v));
        const FunctionTable* table = nullptr;
        if (auto g = guessed_.find(t->fn); g != guessed_.end()) {
          table = &g->second;
        } else if (auto s = st_.functions.find(t->fn); s != st_.functions.end()) {
          table = &s->second;
        } else {
          fail(Err::MissingTable, "function symbol '" + t->fn + "' has no interpretation");
        }
        auto it = table->values.find(tup);
        if (it == table->values.end())
          fail(Err::MissingTable, "table for '" + t->fn + "' has no entry for the argument tuple");
        return it->second;
      }
      case EsoTermKind::Add:
        return eval_term(t->a) + eval_term(t->b);
      case EsoTermKind::Sub:
        return eval_term(t->a) - eval_term(t->b);
      case EsoTermKind::Mul:
        return eval_term(t->a) * eval_term(t->b);
      case EsoTermKind::Sum: {
        Rational acc(0);
        for (long v = 0; v < n_; ++v) {
          scope_[t->binder] = static_cast<int>(v);
          acc += eval_term(t->a);
        }
        scope_.erase(t->binder);
        return acc;
      }
    }
    fail(Err::IllFormed, "unreachable ESO term kind");
  }

  const FiniteStructure& st_;
  long budget_;
  long n_;
  std::map<std::string, FunctionTable> guessed_;
  std::map<std::string, int> scope_;
};

}  // namespace

bool eval_eso(const EsoSentence& s, const FiniteStructure& structure, const EsoTables& w, long cap) {
  validate_structure(structure);
  EsoEvaluator ev(structure, w, s, cap);
  return ev.eval(s);
}

}  // namespace etrforge
