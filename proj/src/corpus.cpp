#include "etrforge/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <random>
#include <sstream>

#include "etrforge/decide.hpp"
#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/reductions.hpp"
#include "etrforge/succinct.hpp"
#include "etrforge/textio.hpp"

namespace etrforge::corpus {

namespace {

using Rng = std::mt19937_64;

long rnd(Rng& rng, long lo, long hi) {
  return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

Rational rnd_rational(Rng& rng) { return Rational(rnd(rng, -9, 9), rnd(rng, 1, 9)); }

template <typename Fn>
CriterionResult timed(int id, const std::string& name, Fn fn) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    std::string detail;
    r.passed = fn(&detail);
    r.detail = detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

FormulaPtr prop_atom(const std::string& name) { return f_eq(t_var(name), t_int(1)); }

// ---------------------------------------------------------------------------
// criterion 1: QBF <-> PiEtr

// Matrices of connective depth up to 3 over the given variables: the level-d
// slice applies every connective to level-(d-1) formulas, capped per level so
// the family stays enumerable while covering every connective at every depth.
std::vector<FormulaPtr> matrix_family(const std::vector<std::string>& vars) {
  std::vector<FormulaPtr> level;
  for (const auto& v : vars) level.push_back(prop_atom(v));
  std::vector<FormulaPtr> all = level;
  const size_t cap = 12;
  for (int depth = 1; depth <= 3; ++depth) {
    std::vector<FormulaPtr> next;
    for (const auto& f : level) {
      if (next.size() >= cap) break;
      next.push_back(f_not(f));
    }
    for (size_t i = 0; i < level.size() && next.size() < cap; ++i)
      for (size_t j = 0; j < level.size() && next.size() < cap; ++j) {
        next.push_back(f_and(level[i], level[j]));
        if (next.size() < cap) next.push_back(f_or(level[i], level[j]));
      }
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return all;
}

FormulaPtr rnd_prop_formula(Rng& rng, const std::vector<std::string>& vars, int depth) {
  if (depth == 0 || rnd(rng, 0, 2) == 0)
    return prop_atom(vars[static_cast<size_t>(rnd(rng, 0, static_cast<long>(vars.size()) - 1))]);
  switch (rnd(rng, 0, 2)) {
    case 0:
      return f_not(rnd_prop_formula(rng, vars, depth - 1));
    case 1:
      return f_and(rnd_prop_formula(rng, vars, depth - 1), rnd_prop_formula(rng, vars, depth - 1));
    default:
      return f_or(rnd_prop_formula(rng, vars, depth - 1), rnd_prop_formula(rng, vars, depth - 1));
  }
}

bool criterion_qbf(Rng& rng, std::string* detail) {
  long checked = 0;
  auto check = [&](const QbfInstance& q) {
    auto pass = qbf_to_pietr(q);
    bool via_pietr = eval_formula(pass.target.formula, {});
    if (via_pietr != eval_qbf(q)) {
      *detail = "mismatch on " + textio::print_qbf(q);
      return false;
    }
    ++checked;
    return true;
  };
  for (int nvars = 1; nvars <= 3; ++nvars) {
    std::vector<std::string> vars;
    for (int i = 1; i <= nvars; ++i) vars.push_back("v" + std::to_string(i));
    auto matrices = matrix_family(vars);
    for (long mask = 0; mask < (1L << nvars); ++mask) {
      QbfInstance q;
      for (int i = 0; i < nvars; ++i)
        q.prefix.emplace_back((mask >> i) & 1 ? Quant::Forall : Quant::Exists, vars[i]);
      for (const auto& m : matrices) {
        q.matrix = m;
        if (!check(q)) return false;
      }
    }
  }
  for (int k = 0; k < 500; ++k) {
    long nvars = rnd(rng, 1, 4);
    std::vector<std::string> vars;
    for (long i = 1; i <= nvars; ++i) vars.push_back("v" + std::to_string(i));
    QbfInstance q;
    for (const auto& v : vars)
      q.prefix.emplace_back(rnd(rng, 0, 1) ? Quant::Forall : Quant::Exists, v);
    q.matrix = rnd_prop_formula(rng, vars, 3);
    if (!check(q)) return false;
  }
  *detail = std::to_string(checked) + " QBFs agreed";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 2: SigmaPi compiler round trip

TermPtr rnd_sigmapi_term(Rng& rng, int depth, std::vector<std::string>& binders, int& binder_budget,
                         const std::vector<std::string>& free_pool, bool allow_prod) {
  long leaf_bias = depth == 0 ? 0 : 2;
  switch (rnd(rng, 0, leaf_bias == 0 ? 1 : 4)) {
    case 0:
      return t_int(rnd(rng, 0, 3));
    case 1: {
      if (!binders.empty() && rnd(rng, 0, 1))
        return t_var(binders[static_cast<size_t>(rnd(rng, 0, static_cast<long>(binders.size()) - 1))]);
      return t_var(free_pool[static_cast<size_t>(rnd(rng, 0, static_cast<long>(free_pool.size()) - 1))]);
    }
    case 2: {
      if (rnd(rng, 0, 2) == 0)
        return t_neg(rnd_sigmapi_term(rng, depth - 1, binders, binder_budget, free_pool, allow_prod));
      TermPtr a = rnd_sigmapi_term(rng, depth - 1, binders, binder_budget, free_pool, allow_prod);
      TermPtr b = rnd_sigmapi_term(rng, depth - 1, binders, binder_budget, free_pool, allow_prod);
      return rnd(rng, 0, 1) ? t_add(a, b) : t_mul(a, b);
    }
    default: {
      if (binder_budget == 0)
        return rnd_sigmapi_term(rng, 0, binders, binder_budget, free_pool, allow_prod);
      --binder_budget;
      std::string name = "b" + std::to_string(binders.size() + 1);
      binders.push_back(name);
      TermPtr body = rnd_sigmapi_term(rng, depth - 1, binders, binder_budget, free_pool, allow_prod);
      binders.pop_back();
      bool prod = allow_prod && rnd(rng, 0, 1);
      return prod ? t_prod(name, 2, body) : t_sum(name, 2, body);
    }
  }
}

bool term_values_agree(const TermPtr& source, const TermPtr& expanded, Rng& rng, int rounds) {
  std::vector<std::string> src_vars(free_vars(source).begin(), free_vars(source).end());
  for (int r = 0; r < rounds; ++r) {
    Assignment a, b;
    for (size_t i = 0; i < src_vars.size(); ++i) {
      Rational v = rnd_rational(rng);
      a[src_vars[i]] = v;
      b["x" + std::to_string(i)] = v;  // compiled variables are numbered in sorted order
    }
    if (eval_term(source, a) != eval_term(expanded, b)) return false;
  }
  return true;
}

bool criterion_sigmapi_roundtrip(Rng& rng, std::string* detail) {
  for (int k = 0; k < 200; ++k) {
    std::vector<std::string> binders;
    int budget = 3;
    TermPtr t = rnd_sigmapi_term(rng, 4, binders, budget, {"u", "v"}, true);
    EtrInstance inst;
    inst.dialect = Dialect::SigmaPiEtr;
    inst.formula = f_eq(t, t_int(0));
    SuccCircuit s = compile_sigma_pi(inst);
    EtrInstance expanded = expand_succ(s, 1L << 22);
    if (expanded.formula->kind != FormulaKind::Atom) {
      *detail = "expansion lost the atom shape";
      return false;
    }
    if (!term_values_agree(t, expanded.formula->lhs, rng, 20)) {
      *detail = "value mismatch on " + textio::print_term(t);
      return false;
    }
  }
  *detail = "200 instances round-tripped";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 3: negation removal

TermPtr rnd_small_term(Rng& rng, int depth, const std::vector<std::string>& vars) {
  if (depth == 0 || rnd(rng, 0, 1) == 0) {
    if (rnd(rng, 0, 1))
      return t_var(vars[static_cast<size_t>(rnd(rng, 0, static_cast<long>(vars.size()) - 1))]);
    return t_int(rnd(rng, 0, 1));
  }
  switch (rnd(rng, 0, 2)) {
    case 0:
      return t_neg(rnd_small_term(rng, depth - 1, vars));
    case 1:
      return t_add(rnd_small_term(rng, depth - 1, vars), rnd_small_term(rng, depth - 1, vars));
    default:
      return t_mul(rnd_small_term(rng, depth - 1, vars), rnd_small_term(rng, depth - 1, vars));
  }
}

FormulaPtr rnd_cmp_formula(Rng& rng, int depth, const std::vector<std::string>& vars) {
  if (depth == 0 || rnd(rng, 0, 2) == 0) {
    CmpOp op = static_cast<CmpOp>(rnd(rng, 0, 2));
    return f_atom(op, rnd_small_term(rng, 2, vars), rnd_small_term(rng, 2, vars));
  }
  switch (rnd(rng, 0, 2)) {
    case 0:
      return f_not(rnd_cmp_formula(rng, depth - 1, vars));
    case 1:
      return f_and(rnd_cmp_formula(rng, depth - 1, vars), rnd_cmp_formula(rng, depth - 1, vars));
    default:
      return f_or(rnd_cmp_formula(rng, depth - 1, vars), rnd_cmp_formula(rng, depth - 1, vars));
  }
}

bool criterion_remove_negations(Rng& rng, std::string* detail) {
  long fixtures = 0, nodes_checked = 0;
  while (fixtures < 100) {
    FormulaPtr f = rnd_cmp_formula(rng, 3, {"u", "v"});
    EtrInstance inst;
    inst.dialect = Dialect::Etr;
    inst.formula = f;
    SuccCircuit s = compile_sigma_pi(inst);
    int n = s.index_width();
    if (n > 6) continue;  // keep fixtures inside the N <= 6 budget
    ++fixtures;
    SuccCircuit r = remove_negations(s);
    // output label check: no Boolean negation, no <=
    for (uint64_t i = 0; i < (uint64_t{1} << (n + 3)); ++i) {
      NodeDescription d = eval_node(r, i);
      if (d.opcode == Opcode::Not || d.opcode == Opcode::Le) {
        *detail = "forbidden label survived at index " + std::to_string(i);
        return false;
      }
    }
    for (uint64_t i = 0; i < (uint64_t{1} << n); ++i) {
      NodeDescription d = eval_node(s, i);
      if (!opcode_is_boolean(d.opcode)) continue;
      EtrInstance src = expand_succ(s, 1L << 22, i);
      EtrInstance plus = expand_succ(r, 1L << 22, i);
      EtrInstance minus = expand_succ(r, 1L << 22, (uint64_t{7} << n) | i);
      std::set<std::string> names = free_vars(src.formula);
      ++nodes_checked;
      for (int round = 0; round < 20; ++round) {
        Assignment a;
        for (const auto& name : names) a[name] = rnd_rational(rng);
        bool want = eval_formula(src.formula, a);
        if (eval_formula(plus.formula, a) != want || eval_formula(minus.formula, a) == want) {
          *detail = "gadget value mismatch at node " + std::to_string(i);
          return false;
        }
      }
    }
  }
  *detail = std::to_string(fixtures) + " fixtures, " + std::to_string(nodes_checked) +
            " Boolean nodes checked";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 4: sum prenexing

void collect_atoms(const FormulaPtr& f, std::vector<const BoolFormula*>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out.push_back(f.get());
      return;
    case FormulaKind::Not:
      collect_atoms(f->f, out);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      collect_atoms(f->f, out);
      collect_atoms(f->g, out);
      return;
  }
}

bool criterion_prenex(Rng& rng, std::string* detail) {
  for (int k = 0; k < 200; ++k) {
    std::vector<std::string> binders;
    int budget = 3;
    TermPtr t = rnd_sigmapi_term(rng, 4, binders, budget, {"u", "v"}, false);
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtr;
    inst.formula = f_eq(t, t_int(0));
    auto pass = prenex_sums(inst);
    std::vector<const BoolFormula*> atoms;
    collect_atoms(pass.target.formula, atoms);
    for (const auto* atom : atoms) {
      if (!is_sum_prenex(atom->lhs) || !is_sum_prenex(atom->rhs)) {
        *detail = "output atom is not in sum-prenex shape";
        return false;
      }
    }
    // the first atom carries the transformed source term
    const BoolFormula* first = atoms.front();
    for (int round = 0; round < 20; ++round) {
      Assignment a;
      for (const auto& name : free_vars(t)) a[name] = rnd_rational(rng);
      Witness w = pass.forward(Witness::of(a));
      if (eval_term(t, a) != eval_term(first->lhs, w.assignment)) {
        *detail = "prenexed value differs from the source";
        return false;
      }
    }
  }
  *detail = "200 instances prenexed and matched";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 5: flattening

FormulaPtr rnd_bool_constrained_formula(Rng& rng, const std::vector<std::string>& vars, int depth) {
  if (depth == 0 || rnd(rng, 0, 2) == 0) {
    auto vterm = [&]() -> TermPtr {
      if (rnd(rng, 0, 2) == 0) return t_int(rnd(rng, 0, 1));
      return t_var(vars[static_cast<size_t>(rnd(rng, 0, static_cast<long>(vars.size()) - 1))]);
    };
    // atoms whose satisfied strict gaps stay 0 or 1 on Boolean values
    switch (rnd(rng, 0, 2)) {
      case 0:
        return f_eq(vterm(), vterm());
      case 1:
        return f_lt(vterm(), vterm());
      default:
        return f_eq(t_mul(vterm(), vterm()), vterm());
    }
  }
  switch (rnd(rng, 0, 2)) {
    case 0:
      return f_not(rnd_bool_constrained_formula(rng, vars, depth - 1));
    case 1:
      return f_and(rnd_bool_constrained_formula(rng, vars, depth - 1),
                   rnd_bool_constrained_formula(rng, vars, depth - 1));
    default:
      return f_or(rnd_bool_constrained_formula(rng, vars, depth - 1),
                  rnd_bool_constrained_formula(rng, vars, depth - 1));
  }
}

bool criterion_flatten(Rng& rng, std::string* detail) {
  long agreed = 0;
  for (int k = 0; k < 50; ++k) {
    long nvars = rnd(rng, 1, 3);
    std::vector<std::string> vars;
    for (long i = 1; i <= nvars; ++i) vars.push_back("w" + std::to_string(i));
    std::vector<FormulaPtr> parts;
    for (const auto& v : vars)
      parts.push_back(f_or(f_eq(t_var(v), t_int(0)), f_eq(t_var(v), t_int(1))));
    parts.push_back(remove_negations_formula(rnd_bool_constrained_formula(rng, vars, 2)));
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtr;
    inst.formula = f_and_all(parts);
    bool source_sat = brute_force_decide(inst);
    auto pass = flatten_single_poly(inst);
    bool target_sat = brute_force_decide(pass.target);
    if (source_sat != target_sat) {
      *detail = "satisfiability changed on " + textio::print_etr(inst);
      return false;
    }
    ++agreed;
  }
  *detail = std::to_string(agreed) + " instances agreed";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 6: event arithmetization

bool eval_event_oracle(const EventPtr& ev, const std::vector<int>& tuple,
                       const std::vector<std::string>& vars) {
  switch (ev->kind) {
    case EventKind::Top:
      return true;
    case EventKind::AtomEq: {
      auto it = std::find(vars.begin(), vars.end(), ev->var);
      long want = std::get<long>(ev->value);
      return tuple[static_cast<size_t>(it - vars.begin())] == want;
    }
    case EventKind::Not:
      return !eval_event_oracle(ev->f, tuple, vars);
    case EventKind::And:
      return eval_event_oracle(ev->f, tuple, vars) && eval_event_oracle(ev->g, tuple, vars);
  }
  return false;
}

bool criterion_event_arithmetization(std::string* detail) {
  long checked = 0;
  for (int n = 1; n <= 4; ++n) {
    std::vector<std::string> vars;
    for (int i = 1; i <= n; ++i) vars.push_back("X" + std::to_string(i));
    for (int c : {2, 3}) {
      // level-capped family of events up to depth 3
      std::vector<EventPtr> level;
      for (const auto& v : vars)
        for (long u = 0; u < c; ++u) level.push_back(e_eq(v, u));
      std::vector<EventPtr> all = level;
      all.push_back(e_top());
      const size_t cap = 14;
      for (int depth = 1; depth <= 3; ++depth) {
        std::vector<EventPtr> next;
        for (const auto& e : level) {
          if (next.size() >= cap) break;
          next.push_back(e_not(e));
        }
        for (size_t i = 0; i < level.size() && next.size() < cap; ++i)
          for (size_t j = 0; j < level.size() && next.size() < cap; ++j)
            next.push_back(e_and(level[i], level[j]));
        all.insert(all.end(), next.begin(), next.end());
        level = std::move(next);
      }
      for (const auto& ev : all) {
        TermPtr poly = arithmetize_event(ev, vars, c);
        std::vector<int> tuple(static_cast<size_t>(n));
        std::function<bool(int)> sweep = [&](int i) -> bool {
          if (i == n) {
            Assignment a;
            for (int j = 0; j < n; ++j) a[vars[static_cast<size_t>(j)]] = Rational(tuple[static_cast<size_t>(j)]);
            Rational got = eval_term(poly, a);
            Rational want = Rational(eval_event_oracle(ev, tuple, vars) ? 1 : 0);
            ++checked;
            return got == want;
          }
          for (int v = 0; v < c; ++v) {
            tuple[static_cast<size_t>(i)] = v;
            if (!sweep(i + 1)) return false;
          }
          return true;
        };
        if (!sweep(0)) {
          *detail = "indicator mismatch (n=" + std::to_string(n) + ", c=" + std::to_string(c) + ")";
          return false;
        }
      }
    }
  }
  *detail = std::to_string(checked) + " tuple evaluations matched";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 7: permanent builder

Rational brute_permanent(int m, const std::function<Rational(int, int)>& entry) {
  std::vector<int> perm(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) perm[static_cast<size_t>(i)] = i;
  Rational total(0);
  do {
    Rational prod(1);
    for (int i = 0; i < m; ++i) prod *= entry(i + 1, perm[static_cast<size_t>(i)] + 1);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

bool criterion_permanent(Rng& rng, std::string* detail) {
  for (int m = 1; m <= 3; ++m) {
    TermPtr perm = permanent_term(m);
    for (int round = 0; round < 20; ++round) {
      Assignment a;
      std::vector<std::vector<Rational>> mat(static_cast<size_t>(m + 1),
                                             std::vector<Rational>(static_cast<size_t>(m + 1)));
      for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
          mat[static_cast<size_t>(i)][static_cast<size_t>(j)] = rnd_rational(rng);
          a["x" + std::to_string(i) + "_" + std::to_string(j)] =
              mat[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
      Rational want = brute_permanent(
          m, [&](int i, int j) { return mat[static_cast<size_t>(i)][static_cast<size_t>(j)]; });
      if (eval_term(perm, a) != want) {
        *detail = "permanent mismatch at m=" + std::to_string(m);
        return false;
      }
    }
    // delta is the exact permutation-matrix indicator on 0/1 matrices
    TermPtr delta = permutation_indicator(m);
    for (long mask = 0; mask < (1L << (m * m)); ++mask) {
      Assignment a;
      bool is_perm = true;
      for (int i = 1; i <= m; ++i) {
        int row_ones = 0;
        for (int j = 1; j <= m; ++j)
          row_ones += (mask >> ((i - 1) * m + (j - 1))) & 1;
        if (row_ones != 1) is_perm = false;
      }
      for (int j = 1; j <= m && is_perm; ++j) {
        int col_ones = 0;
        for (int i = 1; i <= m; ++i) col_ones += (mask >> ((i - 1) * m + (j - 1))) & 1;
        if (col_ones != 1) is_perm = false;
      }
      for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
          a["M" + std::to_string(i) + "_" + std::to_string(j)] =
              Rational((mask >> ((i - 1) * m + (j - 1))) & 1);
      if (eval_term(delta, a) != Rational(is_perm ? 1 : 0)) {
        *detail = "delta mismatch at m=" + std::to_string(m);
        return false;
      }
    }
  }
  *detail = "m in {1,2,3} matched the brute-force oracle";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 8: probabilistic witness transport

bool assignments_equal_sparse(const Assignment& a, const Assignment& b) {
  for (const auto& [name, value] : a) {
    auto it = b.find(name);
    Rational other = it == b.end() ? Rational(0) : it->second;
    if (value != other) return false;
  }
  for (const auto& [name, value] : b) {
    if (!a.count(name) && !value.is_zero()) return false;
  }
  return true;
}

bool criterion_prob_transport(Rng& rng, std::string* detail) {
  // half 1: SigmaViEtr1 -> probabilistic satisfiability
  for (int k = 0; k < 50; ++k) {
    int width = static_cast<int>(rnd(rng, 1, 2));
    long cells = 1L << width;
    Assignment w;
    long budget = 16;
    std::vector<Rational> values;
    for (long i = 0; i < cells; ++i) {
      long num = rnd(rng, -budget, budget);
      budget -= std::abs(num);
      Rational v(num, 16);
      values.push_back(v);
      std::vector<int> bits;
      for (int j = width - 1; j >= 0; --j) bits.push_back(static_cast<int>((i >> j) & 1));
      w[canonical_indexed_name("x", bits)] = v;
    }
    // anchor formula: the squared sum and one pinned entry
    std::vector<TermPtr> idx;
    std::vector<std::string> binders;
    for (int j = 1; j <= width; ++j) binders.push_back("e" + std::to_string(j));
    for (const auto& b : binders) idx.push_back(t_var(b));
    TermPtr sq = t_mul(t_ivar("x", idx), t_ivar("x", idx));
    TermPtr sum = sq;
    for (auto it = binders.rbegin(); it != binders.rend(); ++it) sum = t_sum(*it, 2, sum);
    Rational total(0);
    for (const auto& v : values) total += v * v;
    std::vector<TermPtr> zero_idx;
    for (int j = 0; j < width; ++j) zero_idx.push_back(t_int(0));
    EtrInstance inst;
    inst.dialect = Dialect::SigmaViEtr1;
    inst.formula = f_and(f_eq(sum, t_const(total)), f_eq(t_ivar("x", zero_idx), t_const(values[0])));
    if (!check_witness(inst, Witness::of(w))) {
      *detail = "fixture witness rejected by the source instance";
      return false;
    }
    auto pass = sumvi1_to_probsat(inst);
    Witness dist = pass.forward(Witness::of(w));
    validate_distribution(dist.distribution);
    if (!check_witness(pass.target, dist)) {
      *detail = "transported distribution rejected by the target";
      return false;
    }
    Witness back = pass.backward(dist);
    if (!assignments_equal_sparse(back.assignment, w)) {
      *detail = "backward(forward) is not the identity";
      return false;
    }
  }
  // half 2: SigmaEtrHalf -> small-model probabilistic satisfiability
  for (int k = 0; k < 50; ++k) {
    long n = rnd(rng, 1, 3);
    Assignment w;
    std::vector<std::string> vars;
    long budget = 16;
    for (long i = 1; i <= n; ++i) {
      std::string name = "a" + std::to_string(i);
      vars.push_back(name);
      long num = rnd(rng, -budget, budget);
      budget -= std::abs(num);
      w[name] = Rational(num, 32);
    }
    // anchors: sum_e e * a1 equals its value, and each variable pinned
    TermPtr sum = t_sum("e", 2, t_mul(t_var("e"), t_var(vars[0])));
    std::vector<FormulaPtr> parts{f_eq(sum, t_const(w[vars[0]]))};
    for (const auto& v : vars) parts.push_back(f_eq(t_var(v), t_const(w[v])));
    EtrInstance inst;
    inst.dialect = Dialect::SigmaEtrHalf;
    inst.formula = f_and_all(parts);
    auto pass = sigmaetr_half_to_smsat(inst);
    Witness dist = pass.forward(Witness::of(w));
    validate_distribution(dist.distribution);
    if (support_size(dist.distribution) > n + 2) {
      *detail = "small-model support bound n+2 violated";
      return false;
    }
    if (!check_witness(pass.target, dist)) {
      *detail = "transported distribution rejected by the small-model target";
      return false;
    }
    Witness back = pass.backward(dist);
    if (!assignments_equal_sparse(back.assignment, w)) {
      *detail = "backward(forward) is not the identity (half bound)";
      return false;
    }
  }
  *detail = "100 witnesses transported exactly";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 9: small-model round trip

bool criterion_small_model(Rng& rng, std::string* detail) {
  for (int k = 0; k < 50; ++k) {
    int n = static_cast<int>(rnd(rng, 1, 2));
    int c = static_cast<int>(rnd(rng, 2, 3));
    long p = rnd(rng, 1, 3);
    std::vector<std::string> vars;
    for (int i = 1; i <= n; ++i) vars.push_back("X" + std::to_string(i));
    // random distribution with masses over denominator 8 and support <= p
    Distribution d;
    d.vars = vars;
    d.domain = c;
    long support = rnd(rng, 1, p);
    std::vector<long> numerators(static_cast<size_t>(support), 1);
    for (long rest = 8 - support; rest > 0; --rest)
      numerators[static_cast<size_t>(rnd(rng, 0, support - 1))] += 1;
    for (long i = 0; i < support; ++i) {
      std::vector<int> tuple;
      for (int j = 0; j < n; ++j) tuple.push_back(static_cast<int>(rnd(rng, 0, c - 1)));
      d.entries[tuple] += Rational(numerators[static_cast<size_t>(i)], 8);
    }
    validate_distribution(d);

    // anchors evaluated against the known distribution
    std::vector<ProbFormulaPtr> parts;
    for (int i = 0; i < n; ++i) {
      EventPtr ev = e_eq(vars[static_cast<size_t>(i)], rnd(rng, 0, c - 1));
      Rational val = eval_prob_term(p_prob(ev), d);
      long a = (val * Rational(8)).to_long();
      parts.push_back(pf_atom(CmpOp::Eq, p_mul(encode_integer(8), p_prob(ev)), encode_integer(a)));
    }
    parts.push_back(pf_atom(CmpOp::Eq, p_sum("s", c, p_prob(e_eq_dummy(vars[0], "s"))),
                            encode_integer(1)));
    ProbSatInstance src;
    src.vars = vars;
    src.domain = c;
    src.formula = pf_and_all(parts);
    src.small_model_p = p;
    if (!check_witness(src, Witness::of(d))) {
      *detail = "fixture distribution rejected by its own anchors";
      return false;
    }

    ProbSatInstance normalized = src;
    normalized.formula = normalize_prob_primitives(src.formula, vars, c);
    if (!check_witness(normalized, Witness::of(d))) {
      *detail = "normalization changed satisfaction";
      return false;
    }
    auto pass = smsat_to_sigmaetr(normalized, p);
    Witness tw = pass.forward(Witness::of(d));
    if (!check_witness(pass.target, tw)) {
      *detail = "transported assignment rejected by the sigma-etr target";
      return false;
    }
    Witness back = pass.backward(tw);
    validate_distribution(back.distribution);
    if (!check_small_model(back.distribution, p)) {
      *detail = "backward distribution exceeds the support bound";
      return false;
    }
    if (!check_witness(src, back)) {
      *detail = "backward distribution rejected by the source";
      return false;
    }
  }
  *detail = "50 fixtures round-tripped";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 10: E-MajSat oracle agreement

bool emajsat_oracle(const EmajsatInstance& inst) {
  size_t n = inst.xvars.size();
  long threshold = 1L << (n - 1);
  for (long xm = 0; xm < (1L << n); ++xm) {
    Assignment a;
    for (size_t i = 0; i < n; ++i) a[inst.xvars[i]] = Rational((xm >> i) & 1);
    long count = 0;
    for (long ym = 0; ym < (1L << n); ++ym) {
      for (size_t i = 0; i < n; ++i) a[inst.yvars[i]] = Rational((ym >> i) & 1);
      if (eval_formula(inst.matrix, a)) ++count;
    }
    if (count >= threshold) return true;
  }
  return false;
}

bool criterion_emajsat(Rng& rng, std::string* detail) {
  long agreed = 0;
  for (int k = 0; k < 200; ++k) {
    long n = rnd(rng, 1, 3);
    EmajsatInstance inst;
    std::vector<std::string> pool;
    for (long i = 1; i <= n; ++i) {
      inst.xvars.push_back("x" + std::to_string(i));
      inst.yvars.push_back("y" + std::to_string(i));
      pool.push_back(inst.xvars.back());
      pool.push_back(inst.yvars.back());
    }
    inst.matrix = rnd_prop_formula(rng, pool, 3);
    auto pass = emajsat_to_sigmaetr(inst);
    if (brute_force_decide(pass.target) != emajsat_oracle(inst)) {
      *detail = "oracle disagreement on " + textio::print_emajsat(inst);
      return false;
    }
    ++agreed;
  }
  *detail = std::to_string(agreed) + " formulas agreed";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 11: ESO construction

BoolCircuit const_circuit(bool value) {
  BoolCircuit c;
  c.input_width = 1;
  c.gates.push_back({Gate::Op::Input, 0, -1, -1});
  c.gates.push_back({Gate::Op::Not, -1, 0, -1});
  c.gates.push_back({Gate::Op::And, -1, 0, 1});  // constant false
  if (value) c.gates.push_back({Gate::Op::Not, -1, 2, -1});
  c.outputs.push_back(value ? 3 : 2);
  return c;
}

bool criterion_eso(std::string* detail) {
  // consistent system: x_0 = 1/8, x_1 + x_1 = x_1, x_1 * x_1 = x_1
  Succ18Instance consistent;
  consistent.circuits.push_back(const_circuit(false));
  for (int i = 0; i < 3; ++i) consistent.circuits.push_back(const_circuit(true));
  for (int i = 0; i < 3; ++i) consistent.circuits.push_back(const_circuit(true));
  auto pass_ok = succ18_to_leso(consistent);
  Assignment good{{"x[0]", Rational(1, 8)}, {"x[1]", Rational(0)}};
  Witness tables = pass_ok.forward(Witness::of(good));
  if (!check_witness(pass_ok.target, tables)) {
    *detail = "consistent fixture rejected its transported tables";
    return false;
  }
  Witness back = pass_ok.backward(tables);
  if (!assignments_equal_sparse(back.assignment, good)) {
    *detail = "q table did not transport back to the assignment";
    return false;
  }

  // inconsistent system: x_1 = 1/8 and x_1 + x_1 = x_1
  Succ18Instance inconsistent;
  inconsistent.circuits.push_back(const_circuit(true));
  for (int i = 0; i < 3; ++i) inconsistent.circuits.push_back(const_circuit(true));
  for (int i = 0; i < 3; ++i) inconsistent.circuits.push_back(const_circuit(false));
  auto pass_bad = succ18_to_leso(inconsistent);
  long rejected = 0;
  for (int i = -4; i <= 4; ++i) {
    for (int j = -4; j <= 4; ++j) {
      Assignment grid{{"x[0]", Rational(i, 32)}, {"x[1]", Rational(j, 32)}};
      Witness t = pass_bad.forward(Witness::of(grid));
      if (check_witness(pass_bad.target, t)) {
        *detail = "inconsistent fixture accepted a grid witness";
        return false;
      }
      ++rejected;
    }
  }
  *detail = "consistent fixture accepted; " + std::to_string(rejected) + " grid tables rejected";
  return true;
}

// ---------------------------------------------------------------------------
// criterion 12: parser round trips

Distribution rnd_distribution(Rng& rng) {
  Distribution d;
  int n = static_cast<int>(rnd(rng, 1, 3));
  d.domain = static_cast<int>(rnd(rng, 2, 3));
  for (int i = 1; i <= n; ++i) d.vars.push_back("X" + std::to_string(i));
  long support = rnd(rng, 1, 4);
  std::vector<long> numerators(static_cast<size_t>(support), 1);
  for (long rest = 8 - support; rest > 0; --rest)
    numerators[static_cast<size_t>(rnd(rng, 0, support - 1))] += 1;
  for (long i = 0; i < support; ++i) {
    std::vector<int> tuple;
    for (int j = 0; j < n; ++j) tuple.push_back(static_cast<int>(rnd(rng, 0, d.domain - 1)));
    d.entries[tuple] += Rational(numerators[static_cast<size_t>(i)], 8);
  }
  return d;
}

EventPtr rnd_event(Rng& rng, const std::vector<std::string>& vars, int c,
                   const std::vector<std::string>& dummies, int depth) {
  if (depth == 0 || rnd(rng, 0, 2) == 0) {
    if (rnd(rng, 0, 5) == 0) return e_top();
    const std::string& var = vars[static_cast<size_t>(rnd(rng, 0, static_cast<long>(vars.size()) - 1))];
    if (!dummies.empty() && rnd(rng, 0, 2) == 0)
      return e_eq_dummy(var,
                        dummies[static_cast<size_t>(rnd(rng, 0, static_cast<long>(dummies.size()) - 1))]);
    return e_eq(var, rnd(rng, 0, c - 1));
  }
  if (rnd(rng, 0, 1))
    return e_not(rnd_event(rng, vars, c, dummies, depth - 1));
  return e_and(rnd_event(rng, vars, c, dummies, depth - 1),
               rnd_event(rng, vars, c, dummies, depth - 1));
}

ProbTermPtr rnd_prob_term(Rng& rng, const std::vector<std::string>& vars, int c,
                          std::vector<std::string>& dummies, int depth) {
  if (depth == 0 || rnd(rng, 0, 2) == 0) return p_prob(rnd_event(rng, vars, c, dummies, 2));
  switch (rnd(rng, 0, 3)) {
    case 0:
      return p_neg(rnd_prob_term(rng, vars, c, dummies, depth - 1));
    case 1:
      return p_add(rnd_prob_term(rng, vars, c, dummies, depth - 1),
                   rnd_prob_term(rng, vars, c, dummies, depth - 1));
    case 2:
      return p_mul(rnd_prob_term(rng, vars, c, dummies, depth - 1),
                   rnd_prob_term(rng, vars, c, dummies, depth - 1));
    default: {
      std::string dummy = "s" + std::to_string(dummies.size() + 1);
      dummies.push_back(dummy);
      ProbTermPtr body = rnd_prob_term(rng, vars, c, dummies, depth - 1);
      dummies.pop_back();
      return p_sum(dummy, c, body);
    }
  }
}

SuccCircuit rnd_succ_circuit(Rng& rng) {
  SuccCircuit s;
  s.unary_vars = rnd(rng, 0, 1) == 1;
  BoolCircuit& c = s.circuit;
  c.input_width = 1;
  c.gates.push_back({Gate::Op::Input, 0, -1, -1});
  long extra = rnd(rng, 3, 10);
  for (long i = 0; i < extra; ++i) {
    long top = static_cast<long>(c.gates.size()) - 1;
    switch (rnd(rng, 0, 2)) {
      case 0:
        c.gates.push_back({Gate::Op::Not, -1, static_cast<int>(rnd(rng, 0, top)), -1});
        break;
      case 1:
        c.gates.push_back({Gate::Op::And, -1, static_cast<int>(rnd(rng, 0, top)),
                           static_cast<int>(rnd(rng, 0, top))});
        break;
      default:
        c.gates.push_back({Gate::Op::Or, -1, static_cast<int>(rnd(rng, 0, top)),
                           static_cast<int>(rnd(rng, 0, top))});
        break;
    }
  }
  for (int i = 0; i < 12; ++i)  // 8 + 4N with N = 1
    c.outputs.push_back(static_cast<int>(rnd(rng, 0, static_cast<long>(c.gates.size()) - 1)));
  return s;
}

bool instances_equal(const EtrInstance& a, const EtrInstance& b) {
  return a.dialect == b.dialect && formula_equal(a.formula, b.formula) &&
         a.declared_vars == b.declared_vars && a.candidates == b.candidates;
}

bool circuits_equal(const BoolCircuit& a, const BoolCircuit& b) {
  if (a.input_width != b.input_width || a.outputs != b.outputs || a.gates.size() != b.gates.size())
    return false;
  for (size_t i = 0; i < a.gates.size(); ++i) {
    const Gate &x = a.gates[i], &y = b.gates[i];
    if (x.op != y.op || x.input != y.input || x.a != y.a || x.b != y.b) return false;
  }
  return true;
}

bool criterion_roundtrip(Rng& rng, std::string* detail) {
  long checked = 0;
  auto bytes_stable = [&](const std::string& text, auto parse, auto print) {
    auto once = parse(text);
    return print(once) == text;
  };

  for (int k = 0; k < 1000; ++k) {
    // ETR instances across the dialects
    std::vector<std::string> binders;
    int budget = 2;
    EtrInstance inst;
    inst.dialect = rnd(rng, 0, 1) ? Dialect::SigmaPiEtr : Dialect::Etr;
    TermPtr t = inst.dialect == Dialect::Etr
                    ? rnd_small_term(rng, 2, {"u", "v"})
                    : rnd_sigmapi_term(rng, 3, binders, budget, {"u", "v"}, true);
    inst.formula = f_eq(t, t_int(0));
    if (rnd(rng, 0, 1)) inst.declared_vars = free_vars(inst.formula);
    if (rnd(rng, 0, 2) == 0)
      inst.candidates["u"] = {Rational(0), Rational(1, 2), Rational(1)};
    std::string text = textio::print_etr(inst);
    if (!instances_equal(textio::parse_etr(text), inst) ||
        !bytes_stable(text, textio::parse_etr, textio::print_etr)) {
      *detail = "etr round trip failed:\n" + text;
      return false;
    }
    ++checked;

    // QBF
    QbfInstance q;
    long nv = rnd(rng, 1, 3);
    std::vector<std::string> vars;
    for (long i = 1; i <= nv; ++i) {
      vars.push_back("v" + std::to_string(i));
      q.prefix.emplace_back(rnd(rng, 0, 1) ? Quant::Forall : Quant::Exists, vars.back());
    }
    q.matrix = rnd_prop_formula(rng, vars, 2);
    text = textio::print_qbf(q);
    QbfInstance q2 = textio::parse_qbf(text);
    if (q2.prefix != q.prefix || !formula_equal(q2.matrix, q.matrix) ||
        !bytes_stable(text, textio::parse_qbf, textio::print_qbf)) {
      *detail = "qbf round trip failed";
      return false;
    }
    ++checked;

    // distribution
    Distribution d = rnd_distribution(rng);
    text = textio::print_distribution(d);
    Distribution d2 = textio::parse_distribution(text);
    if (d2.vars != d.vars || d2.domain != d.domain || d2.entries != d.entries) {
      *detail = "distribution round trip failed";
      return false;
    }
    ++checked;

    // probabilistic instance
    ProbSatInstance pi;
    pi.domain = static_cast<int>(rnd(rng, 2, 3));
    long pn = rnd(rng, 1, 2);
    for (long i = 1; i <= pn; ++i) pi.vars.push_back("X" + std::to_string(i));
    if (rnd(rng, 0, 1)) pi.small_model_p = rnd(rng, 1, 4);
    std::vector<std::string> dummies;
    pi.formula = pf_atom(static_cast<CmpOp>(rnd(rng, 0, 2)),
                         rnd_prob_term(rng, pi.vars, pi.domain, dummies, 2),
                         rnd_prob_term(rng, pi.vars, pi.domain, dummies, 2));
    text = textio::print_prob(pi);
    ProbSatInstance pi2 = textio::parse_prob(text);
    if (pi2.vars != pi.vars || pi2.domain != pi.domain ||
        pi2.small_model_p != pi.small_model_p || !prob_formula_equal(pi2.formula, pi.formula)) {
      *detail = "probabilistic instance round trip failed";
      return false;
    }
    ++checked;

    // succinct circuit
    SuccCircuit sc = rnd_succ_circuit(rng);
    text = textio::print_succ(sc);
    SuccCircuit sc2 = textio::parse_succ(text);
    if (sc2.unary_vars != sc.unary_vars || !circuits_equal(sc2.circuit, sc.circuit)) {
      *detail = "succinct circuit round trip failed";
      return false;
    }
    ++checked;

    // witnesses of all three kinds
    Witness w;
    switch (rnd(rng, 0, 2)) {
      case 0: {
        Assignment a;
        long entries = rnd(rng, 0, 4);
        for (long i = 0; i < entries; ++i) a["n" + std::to_string(i)] = rnd_rational(rng);
        w = Witness::of(std::move(a), "fuzz");
        break;
      }
      case 1:
        w = Witness::of(rnd_distribution(rng), "fuzz");
        break;
      default: {
        EsoTables tables;
        EsoTables::Table table;
        table.arity = 1;
        table.entries[{"0"}] = rnd_rational(rng);
        table.entries[{"1"}] = rnd_rational(rng);
        tables.tables["f"] = table;
        w = Witness::of(std::move(tables), "fuzz");
        break;
      }
    }
    text = textio::print_witness(w);
    Witness w2 = textio::parse_witness(text);
    if (w2.kind != w.kind || textio::print_witness(w2) != text) {
      *detail = "witness round trip failed";
      return false;
    }
    ++checked;
  }

  // structured fixtures with less fuzz-friendly shapes
  for (int k = 0; k < 50; ++k) {
    Succ18Instance s18;
    for (int i = 0; i < 7; ++i) s18.circuits.push_back(const_circuit(rnd(rng, 0, 1) == 1));
    std::string text = textio::print_succ18(s18);
    Succ18Instance s18b = textio::parse_succ18(text);
    bool same = s18b.circuits.size() == 7;
    for (int i = 0; same && i < 7; ++i) same = circuits_equal(s18b.circuits[i], s18.circuits[i]);
    if (!same) {
      *detail = "succ18 round trip failed";
      return false;
    }

    EsoInstance eso;
    eso.structure.domain = {"0", "1"};
    RelationTable one;
    one.arity = 1;
    one.tuples.insert({1});
    eso.structure.relations["One"] = one;
    FunctionTable ft;
    ft.arity = 1;
    ft.values[{0}] = rnd_rational(rng);
    ft.values[{1}] = rnd_rational(rng);
    eso.structure.functions["w"] = ft;
    eso.sentence = q_existsf(
        "f", 1,
        q_forall("x", q_and(q_cmp(CmpOp::Le, s_app("f", {"x"}), s_const(Rational(1))),
                            q_or(q_rel("One", {"x"}, rnd(rng, 0, 1) == 1),
                                 q_cmp(CmpOp::Eq, s_sum("y", s_app("f", {"y"})),
                                       s_add(s_app("w", {"x"}), s_const(rnd_rational(rng))))))));
    text = textio::print_eso(eso);
    EsoInstance eso2 = textio::parse_eso(text);
    if (!eso_formula_equal(eso2.sentence, eso.sentence) ||
        textio::print_eso(eso2) != text) {
      *detail = "eso round trip failed";
      return false;
    }

    EmajsatInstance em;
    em.xvars = {"x1"};
    em.yvars = {"y1"};
    em.matrix = rnd_prop_formula(rng, {"x1", "y1"}, 2);
    text = textio::print_emajsat(em);
    EmajsatInstance em2 = textio::parse_emajsat(text);
    if (em2.xvars != em.xvars || em2.yvars != em.yvars || !formula_equal(em2.matrix, em.matrix)) {
      *detail = "emajsat round trip failed";
      return false;
    }
    checked += 3;
  }
  *detail = std::to_string(checked) + " artifacts round-tripped";
  return true;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(uint64_t seed) {
  std::vector<CriterionResult> out;
  Rng rng(seed);
  out.push_back(timed(1, "qbf-pietr-equivalence", [&](std::string* d) {
    bool ok = criterion_qbf(rng, d);
    return ok;
  }));
  if (out.back().seconds >= 60.0) {
    out.back().passed = false;
    out.back().detail += " (exceeded the 60 s budget)";
  }
  out.push_back(timed(2, "sigmapi-compiler-roundtrip",
                      [&](std::string* d) { return criterion_sigmapi_roundtrip(rng, d); }));
  out.push_back(timed(3, "negation-removal",
                      [&](std::string* d) { return criterion_remove_negations(rng, d); }));
  out.push_back(timed(4, "sum-prenexing", [&](std::string* d) { return criterion_prenex(rng, d); }));
  out.push_back(timed(5, "flattening", [&](std::string* d) { return criterion_flatten(rng, d); }));
  out.push_back(timed(6, "event-arithmetization",
                      [&](std::string* d) { return criterion_event_arithmetization(d); }));
  out.push_back(
      timed(7, "permanent-builder", [&](std::string* d) { return criterion_permanent(rng, d); }));
  out.push_back(timed(8, "probabilistic-witness-transport",
                      [&](std::string* d) { return criterion_prob_transport(rng, d); }));
  out.push_back(timed(9, "small-model-roundtrip",
                      [&](std::string* d) { return criterion_small_model(rng, d); }));
  out.push_back(
      timed(10, "emajsat-oracle-agreement", [&](std::string* d) { return criterion_emajsat(rng, d); }));
  if (out.back().seconds >= 120.0) {
    out.back().passed = false;
    out.back().detail += " (exceeded the 120 s budget)";
  }
  out.push_back(timed(11, "eso-construction", [&](std::string* d) { return criterion_eso(d); }));
  out.push_back(
      timed(12, "parser-roundtrip", [&](std::string* d) { return criterion_roundtrip(rng, d); }));
  return out;
}

bool print_acceptance_table(const std::vector<CriterionResult>& results, std::string* out) {
  std::ostringstream os;
  bool all = true;
  for (const auto& r : results) {
    os << (r.passed ? "PASS" : "FAIL") << "  #" << r.id << " " << r.name;
    if (!r.detail.empty()) os << " — " << r.detail;
    os << " [" << static_cast<long>(r.seconds * 1000) << " ms]\n";
    all = all && r.passed;
  }
  os << (all ? "all criteria passed" : "some criteria FAILED") << "\n";
  *out = os.str();
  return all;
}

}  // namespace etrforge::corpus
