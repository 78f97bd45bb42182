#include "etrforge/reductions.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "etrforge/decide.hpp"
#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"

namespace etrforge {

void validate_succ18(const Succ18Instance& inst) {
  if (inst.circuits.size() != 7) fail(Err::IllFormed, "expected seven circuits C0..C6");
  int m = inst.circuits[0].input_width;
  size_t n = inst.circuits[0].outputs.size();
  for (const auto& c : inst.circuits) {
    validate_circuit(c);
    if (c.input_width != m || c.outputs.size() != n)
      fail(Err::WidthMismatch, "the seven circuits must share input and output widths");
  }
}

// ---------------------------------------------------------------------------
// Boolean arithmetization

namespace {

TermPtr one_minus(TermPtr t) { return t_sub(t_int(1), std::move(t)); }

}  // namespace

TermPtr arithmetize_bool(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      bool propositional = f->op == CmpOp::Eq && f->lhs->kind == TermKind::Var &&
                           !f->lhs->var.is_indexed() && f->rhs->kind == TermKind::Const &&
                           f->rhs->value == Rational(1);
      if (!propositional)
        fail(Err::NonPropositionalAtom, "arithmetization needs atoms of the shape (eq (var x) (const 1))");
      return t_var(f->lhs->var.base);
    }
    case FormulaKind::Not:
      return one_minus(arithmetize_bool(f->f));
    case FormulaKind::And:
      return t_mul(arithmetize_bool(f->f), arithmetize_bool(f->g));
    case FormulaKind::Or:
      return one_minus(t_mul(one_minus(arithmetize_bool(f->f)), one_minus(arithmetize_bool(f->g))));
  }
  fail(Err::IllFormed, "unreachable formula kind");
}

PassResult<EtrInstance> qbf_to_pietr(const QbfInstance& q) {
  validate_qbf(q);
  TermPtr acc = arithmetize_bool(q.matrix);
  for (auto it = q.prefix.rbegin(); it != q.prefix.rend(); ++it) {
    const auto& [quant, name] = *it;
    if (quant == Quant::Forall)
      acc = t_prod(name, 2, acc);
    else
      acc = one_minus(t_prod(name, 2, one_minus(acc)));
  }
  PassResult<EtrInstance> result;
  result.target.dialect = Dialect::PiEtr;
  result.target.formula = f_eq(acc, t_int(1));
  result.notes = "closed sentence, no witness transport";
  return result;
}

PassResult<EtrInstance> emajsat_to_sigmaetr(const EmajsatInstance& inst) {
  if (inst.xvars.size() != inst.yvars.size())
    fail(Err::IllFormed, "E-MajSat needs equally many x- and y-variables");
  size_t n = inst.yvars.size();
  if (n == 0) fail(Err::IllFormed, "E-MajSat needs at least one variable pair");
  TermPtr body = arithmetize_bool(inst.matrix);
  for (auto it = inst.yvars.rbegin(); it != inst.yvars.rend(); ++it) body = t_sum(*it, 2, body);
  std::vector<FormulaPtr> parts;
  for (const auto& x : inst.xvars)
    parts.push_back(f_or(f_eq(t_var(x), t_int(0)), f_eq(t_var(x), t_int(1))));
  parts.push_back(f_le(t_const(pow2(static_cast<long>(n) - 1)), body));

  PassResult<EtrInstance> result;
  result.target.dialect = Dialect::SigmaEtr;
  result.target.formula = f_and_all(parts);
  result.target.declared_vars.insert(inst.xvars.begin(), inst.xvars.end());
  std::vector<std::string> xvars = inst.xvars;
  auto restrict_to_x = [xvars](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out;
    for (const auto& x : xvars) {
      auto it = w.assignment.find(x);
      if (it == w.assignment.end()) fail(Err::UnboundVariable, "witness lacks '" + x + "'");
      out[x] = it->second;
    }
    return Witness::of(std::move(out), "emajsat_to_sigmaetr");
  };
  result.forward = restrict_to_x;
  result.backward = restrict_to_x;
  return result;
}

// ---------------------------------------------------------------------------
// solution bound

Rational SolutionBound::bound() const {
  if (exponent > 1 << 20) fail(Err::TooLarge, "bound exponent beyond 2^20 bits");
  return pow2(exponent.get_si());
}

SolutionBound compute_solution_bound(const BoundParameters& b) {
  if (b.L < 1 || b.d < 1 || b.n < 1 || b.c < 1) fail(Err::IllFormed, "bound parameters must be >= 1");
  SolutionBound out;
  out.L = b.L;
  out.d = b.d;
  out.cn = b.c * b.n;
  mpz_class power;
  mpz_ui_pow_ui(power.get_mpz_t(), static_cast<unsigned long>(b.d),
                static_cast<unsigned long>(out.cn));
  out.exponent = mpz_class(b.L) * power;
  return out;
}

// ---------------------------------------------------------------------------
// shared term machinery

namespace {

TermPtr nest_sums(const std::vector<std::string>& binders, TermPtr body) {
  for (auto it = binders.rbegin(); it != binders.rend(); ++it) body = t_sum(*it, 2, body);
  return body;
}

// Denominator bound: a positive integer D such that D * t has integer
// constants throughout under the scaling scheme below.
mpz_class den_bound(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Const:
      return t->value.den();
    case TermKind::Var:
      return 1;
    case TermKind::Neg:
    case TermKind::Sum:
      return den_bound(t->a);
    case TermKind::Prod: {
      mpz_class d = den_bound(t->a);
      return d * d;
    }
    case TermKind::Add: {
      mpz_class a = den_bound(t->a), b = den_bound(t->b), l;
      mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      return l;
    }
    case TermKind::Mul:
      return den_bound(t->a) * den_bound(t->b);
  }
  return 1;
}

// L * t with the factor distributed so that every constant becomes an
// integer; requires den_bound(t) | L.
TermPtr scale_term(const TermPtr& t, const mpz_class& L) {
  if (L == 1) return t;
  switch (t->kind) {
    case TermKind::Const:
      return t_const(t->value * Rational(mpq_class(L)));
    case TermKind::Var:
      return t_mul(t_const(Rational(mpq_class(L))), t);
    case TermKind::Neg:
      return t_neg(scale_term(t->a, L));
    case TermKind::Add:
      return t_add(scale_term(t->a, L), scale_term(t->b, L));
    case TermKind::Mul: {
      mpz_class la = den_bound(t->a);
      mpz_class lb = L / la;
      return t_mul(scale_term(t->a, la), scale_term(t->b, lb));
    }
    case TermKind::Sum:
      return t_sum(t->binder, t->domain, scale_term(t->a, L));
    case TermKind::Prod:
      fail(Err::UnsupportedAtom, "cannot clear denominators under a product binder");
  }
  return t;
}

// Multiplies both sides of every atom by the least common denominator, leaving
// only integer constants. Inequalities keep their direction (the factor is
// positive).
FormulaPtr clear_denominators(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      mpz_class dl = den_bound(f->lhs), dr = den_bound(f->rhs), L;
      mpz_lcm(L.get_mpz_t(), dl.get_mpz_t(), dr.get_mpz_t());
      if (L == 1) return f;
      return f_atom(f->op, scale_term(f->lhs, L), scale_term(f->rhs, L));
    }
    case FormulaKind::Not:
      return f_not(clear_denominators(f->f));
    case FormulaKind::And:
      return f_and(clear_denominators(f->f), clear_denominators(f->g));
    case FormulaKind::Or:
      return f_or(clear_denominators(f->f), clear_denominators(f->g));
  }
  return f;
}

// Degree in the real variables; binder references count as constants.
long term_degree(const TermPtr& t, std::set<std::string>& binders) {
  switch (t->kind) {
    case TermKind::Const:
      return 0;
    case TermKind::Var:
      if (!t->var.is_indexed() && binders.count(t->var.base)) return 0;
      return 1;
    case TermKind::Neg:
      return term_degree(t->a, binders);
    case TermKind::Add:
      return std::max(term_degree(t->a, binders), term_degree(t->b, binders));
    case TermKind::Mul:
      return term_degree(t->a, binders) + term_degree(t->b, binders);
    case TermKind::Sum:
    case TermKind::Prod: {
      bool fresh = binders.insert(t->binder).second;
      long d = term_degree(t->a, binders);
      if (fresh) binders.erase(t->binder);
      return t->kind == TermKind::Prod ? 2 * d : d;
    }
  }
  return 0;
}

TermPtr power_term(const TermPtr& base, long k) {
  if (k <= 0) return t_int(1);
  TermPtr acc = base;
  for (long i = 1; i < k; ++i) acc = t_mul(acc, base);
  return acc;
}

bool uses_binder_as_value(const TermPtr& t, const std::string& binder) {
  switch (t->kind) {
    case TermKind::Const:
      return false;
    case TermKind::Var:
      if (!t->var.is_indexed()) return t->var.base == binder;
      return false;  // index positions do not count as value uses
    case TermKind::Neg:
      return uses_binder_as_value(t->a, binder);
    case TermKind::Add:
    case TermKind::Mul:
      return uses_binder_as_value(t->a, binder) || uses_binder_as_value(t->b, binder);
    case TermKind::Sum:
    case TermKind::Prod:
      if (t->binder == binder) return false;
      return uses_binder_as_value(t->a, binder);
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// successor indicator

TermPtr successor_indicator(const std::vector<std::string>& ebits,
                            const std::vector<std::string>& fbits) {
  if (ebits.empty() || ebits.size() != fbits.size())
    fail(Err::IllFormed, "successor indicator needs matching nonempty bit lists");
  size_t m = ebits.size();
  // Bit 1 is the most significant; the carry ripples up from the low end.
  auto carry = [&](size_t i) -> TermPtr {  // carry into position i (1-based)
    TermPtr c = t_int(1);
    for (size_t j = i + 1; j <= m; ++j) c = t_mul(c, t_var(ebits[j - 1]));
    return c;
  };
  TermPtr acc = t_int(1);
  for (size_t i = 1; i <= m; ++i) {
    TermPtr e = t_var(ebits[i - 1]);
    TermPtr f = t_var(fbits[i - 1]);
    TermPtr c = carry(i);
    // f_i must equal e_i xor c_i, with xor(a,b) = a + b - 2ab
    TermPtr x = t_add(t_add(e, c), t_neg(t_mul(t_int(2), t_mul(e, c))));
    TermPtr diff = t_sub(f, x);
    acc = t_mul(acc, one_minus(t_mul(diff, diff)));
  }
  TermPtr all_ones = t_int(1);
  for (size_t i = 0; i < m; ++i) all_ones = t_mul(all_ones, t_var(ebits[i]));
  return t_mul(one_minus(all_ones), acc);
}

// ---------------------------------------------------------------------------
// sumvi_to_sumvi1

namespace {

struct ScaleBySmallD {
  std::string dvar;

  TermPtr transform(const TermPtr& t, long k, std::set<std::string>& binders) const {
    switch (t->kind) {
      case TermKind::Const:
        return k == 0 ? t : t_mul(t, power_term(t_var(dvar), k));
      case TermKind::Var: {
        if (!t->var.is_indexed() && binders.count(t->var.base))
          return k == 0 ? t : t_mul(t, power_term(t_var(dvar), k));
        // real variable: x/d picks up d^(k-1)
        return k == 1 ? t : t_mul(t, power_term(t_var(dvar), k - 1));
      }
      case TermKind::Neg:
        return t_neg(transform(t->a, k, binders));
      case TermKind::Add:
        return t_add(transform(t->a, k, binders), transform(t->b, k, binders));
      case TermKind::Mul: {
        long da = term_degree(t->a, binders);
        return t_mul(transform(t->a, da, binders), transform(t->b, k - da, binders));
      }
      case TermKind::Sum: {
        bool fresh = binders.insert(t->binder).second;
        TermPtr body = transform(t->a, k, binders);
        if (fresh) binders.erase(t->binder);
        return t_sum(t->binder, t->domain, body);
      }
      case TermKind::Prod:
        fail(Err::DialectViolation, "products do not occur in the vi dialects");
    }
    return t;
  }
};

FormulaPtr map_atoms(const FormulaPtr& f, const std::function<FormulaPtr(const FormulaPtr&)>& fn) {
  switch (f->kind) {
    case FormulaKind::Atom:
      return fn(f);
    case FormulaKind::Not:
      return f_not(map_atoms(f->f, fn));
    case FormulaKind::And:
      return f_and(map_atoms(f->f, fn), map_atoms(f->g, fn));
    case FormulaKind::Or:
      return f_or(map_atoms(f->f, fn), map_atoms(f->g, fn));
  }
  return f;
}

}  // namespace

PassResult<EtrInstance> sumvi_to_sumvi1(const EtrInstance& inst, int m) {
  if (inst.dialect != Dialect::SigmaViEtr && inst.dialect != Dialect::SigmaEtr)
    fail(Err::DialectViolation, "pass expects a sigma-vi-etr (or sigma-etr) instance");
  ValidationReport report = validate_dialect(inst);
  if (!report.ok()) fail(Err::DialectViolation, report.to_string());
  if (m < 1 || m > 10) fail(Err::IllFormed, "chain parameter m must be in 1..10");

  FormulaPtr cleared = clear_denominators(inst.formula);

  // S: bit length of the instance, measured on the cleared formula's printed
  // size in bits. Any polynomial measure works; this one is reproducible.
  std::ostringstream sizer;
  std::function<long(const TermPtr&)> tsize = [&](const TermPtr& t) -> long {
    switch (t->kind) {
      case TermKind::Const:
        return static_cast<long>(mpz_sizeinbase(t->value.num().get_mpz_t(), 2)) + 2;
      case TermKind::Var:
        if (!t->var.is_indexed()) return 2;
        {
          long s = 2;
          for (const auto& e : t->var.index) s += tsize(e);
          return s;
        }
      case TermKind::Neg:
      case TermKind::Sum:
      case TermKind::Prod:
        return 2 + tsize(t->a);
      case TermKind::Add:
      case TermKind::Mul:
        return 2 + tsize(t->a) + tsize(t->b);
    }
    return 1;
  };
  std::function<long(const FormulaPtr&)> fsize = [&](const FormulaPtr& f) -> long {
    switch (f->kind) {
      case FormulaKind::Atom:
        return 2 + tsize(f->lhs) + tsize(f->rhs);
      case FormulaKind::Not:
        return 2 + fsize(f->f);
      case FormulaKind::And:
      case FormulaKind::Or:
        return 2 + fsize(f->f) + fsize(f->g);
    }
    return 1;
  };
  long S = fsize(cleared);

  std::set<std::string> taken = collect_name_bases(cleared);
  std::string tbase = fresh_name("t", taken);
  taken.insert(tbase);

  auto fresh_list = [&taken](const std::string& prefix, long count) {
    std::vector<std::string> out;
    for (long i = 1; i <= count; ++i) {
      std::string name = fresh_name(prefix + std::to_string(i), taken);
      taken.insert(name);
      out.push_back(name);
    }
    return out;
  };
  std::vector<std::string> ebits = fresh_list("e", m);
  std::vector<std::string> fbits = fresh_list("f", m);
  std::vector<std::string> sbits = fresh_list("s", S);

  auto t_at_bits = [&](const std::vector<int>& bits) {
    return t_var(canonical_indexed_name(tbase, bits));
  };
  std::vector<int> zeros(m, 0), ones(m, 1);

  // (2^m + 2^S) * t_1 = 1, the powers spelled as nested binary sums
  TermPtr two_m = nest_sums(ebits, t_int(1));
  TermPtr two_s = nest_sums(sbits, t_int(1));
  FormulaPtr eq1 = f_eq(t_mul(t_add(two_m, two_s), t_at_bits(zeros)), t_int(1));

  // sum over e, f of (t_e^2 - t_f)^2 * A(e, f) = 0, forcing the squaring chain
  std::vector<TermPtr> eidx, fidx;
  for (int i = 0; i < m; ++i) {
    eidx.push_back(t_var(ebits[i]));
    fidx.push_back(t_var(fbits[i]));
  }
  TermPtr te = t_ivar(tbase, eidx);
  TermPtr tf = t_ivar(tbase, fidx);
  TermPtr diff = t_sub(t_mul(te, te), tf);
  TermPtr chain_body = t_mul(t_mul(diff, diff), successor_indicator(ebits, fbits));
  std::vector<std::string> allbits = ebits;
  allbits.insert(allbits.end(), fbits.begin(), fbits.end());
  FormulaPtr eq2 = f_eq(nest_sums(allbits, chain_body), t_int(0));

  // scale the source: every atom becomes d^deg * (atom with x -> x/d)
  std::string dname = canonical_indexed_name(tbase, ones);
  ScaleBySmallD scaler{dname};
  FormulaPtr scaled = map_atoms(cleared, [&](const FormulaPtr& atom) {
    std::set<std::string> binders;
    long dl = term_degree(atom->lhs, binders);
    long dr = term_degree(atom->rhs, binders);
    long k = std::max(dl, dr);
    return f_atom(atom->op, scaler.transform(atom->lhs, k, binders),
                  scaler.transform(atom->rhs, k, binders));
  });

  PassResult<EtrInstance> result;
  result.target.dialect = Dialect::SigmaViEtr1;
  result.target.formula = f_and(f_and(scaled, eq1), eq2);
  result.notes = "m=" + std::to_string(m) + " S=" + std::to_string(S);

  // d = t_{1...1} = t_1^(2^(2^m - 1)) with t_1 = 1/(2^m + 2^S)
  long chain_len = 1L << m;
  Rational t1 = Rational(1) / Rational(mpq_class(mpz_class(pow2(m).num() + pow2(S).num())));
  std::string tb = tbase;
  int mm = m;
  auto chain_value = [t1](long i) {  // t_i = t_1^(2^(i-1)), 1-based
    if (i - 1 > 30) fail(Err::TooLarge, "chain exponent too large to materialize");
    return t1.pow(1UL << (i - 1));
  };
  Rational dval = chain_value(chain_len);

  result.forward = [tb, mm, chain_len, chain_value, dval](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out;
    for (const auto& [name, value] : w.assignment) out[name] = value * dval;
    for (long i = 1; i <= chain_len; ++i) {
      std::vector<int> bits(mm);
      for (int j = 0; j < mm; ++j) bits[j] = ((i - 1) >> (mm - 1 - j)) & 1;
      out[canonical_indexed_name(tb, bits)] = chain_value(i);
    }
    return Witness::of(std::move(out), "sumvi_to_sumvi1 forward");
  };
  result.backward = [tb, dval](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out;
    for (const auto& [name, value] : w.assignment) {
      if (name.rfind(tb + "[", 0) == 0) continue;
      out[name] = value / dval;
    }
    return Witness::of(std::move(out), "sumvi_to_sumvi1 backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// sumvi1_to_probsat

namespace {

// How the (possibly indexed) variables of a vi instance map onto binary index
// tuples of width N.
struct VariableLayout {
  int width = 1;
  // concrete variables (canonical names) -> index bits
  std::map<std::string, std::vector<int>> names;
  // indexed family base -> (prefix bits, pad width); family index bits follow
  std::map<std::string, std::pair<std::vector<int>, int>> families;
};

void collect_families(const TermPtr& t, std::map<std::string, int>& widths) {
  switch (t->kind) {
    case TermKind::Const:
      return;
    case TermKind::Var: {
      if (!t->var.is_indexed()) return;
      int w = static_cast<int>(t->var.index.size());
      auto [it, inserted] = widths.emplace(t->var.base, w);
      if (!inserted && it->second != w)
        fail(Err::DialectViolation, "family '" + t->var.base + "' used with two index widths");
      for (const auto& e : t->var.index) {
        bool ok = (e->kind == TermKind::Const && (e->value == Rational(0) || e->value == Rational(1))) ||
                  (e->kind == TermKind::Var && !e->var.is_indexed());
        if (!ok)
          fail(Err::UnsupportedAtom,
               "index expressions must be bits or binder references for this pass");
      }
      return;
    }
    case TermKind::Neg:
    case TermKind::Sum:
    case TermKind::Prod:
      collect_families(t->a, widths);
      return;
    case TermKind::Add:
    case TermKind::Mul:
      collect_families(t->a, widths);
      collect_families(t->b, widths);
      return;
  }
}

void collect_families(const FormulaPtr& f, std::map<std::string, int>& widths) {
  switch (f->kind) {
    case FormulaKind::Atom:
      collect_families(f->lhs, widths);
      collect_families(f->rhs, widths);
      return;
    case FormulaKind::Not:
      collect_families(f->f, widths);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      collect_families(f->f, widths);
      collect_families(f->g, widths);
      return;
  }
}

std::vector<int> to_bits(long value, int width) {
  std::vector<int> bits(width);
  for (int j = 0; j < width; ++j) bits[j] = (value >> (width - 1 - j)) & 1;
  return bits;
}

int bits_needed(long n) {
  int b = 0;
  while ((1L << b) < n) ++b;
  return b;
}

VariableLayout layout_variables(const EtrInstance& inst) {
  std::map<std::string, int> widths;
  collect_families(inst.formula, widths);
  std::set<std::string> free = free_vars(inst.formula);

  // canonical family members found as plain names fold into their family
  std::vector<std::string> directs;
  for (const auto& name : free) {
    auto bracket = name.find('[');
    if (bracket != std::string::npos) {
      std::string base = name.substr(0, bracket);
      auto it = widths.find(base);
      if (it != widths.end() &&
          name.size() == bracket + 2 + static_cast<size_t>(it->second) && name.back() == ']')
        continue;  // member of a known family
    }
    directs.push_back(name);
  }

  VariableLayout layout;
  int nfam = static_cast<int>(widths.size());
  int groups = nfam + (directs.empty() ? 0 : 1);
  if (groups == 0) {
    layout.width = 1;
    return layout;
  }
  int prefix_bits = bits_needed(groups);
  int body = 0;
  for (const auto& [base, w] : widths) {
    (void)base;
    body = std::max(body, w);
  }
  body = std::max(body, bits_needed(std::max<long>(1, static_cast<long>(directs.size()))));
  body = std::max(body, 1);
  layout.width = prefix_bits + body;

  int group = 0;
  for (const auto& [base, w] : widths) {
    std::vector<int> prefix = to_bits(group, prefix_bits);
    layout.families[base] = {prefix, body - w};
    ++group;
  }
  for (size_t i = 0; i < directs.size(); ++i) {
    std::vector<int> bits = to_bits(group, prefix_bits);
    std::vector<int> tail = to_bits(static_cast<long>(i), body);
    bits.insert(bits.end(), tail.begin(), tail.end());
    layout.names[directs[i]] = bits;
  }
  // enumerate concrete family members for witness transport
  for (const auto& [base, w] : widths) {
    const auto& [prefix, pad] = layout.families.at(base);
    for (long v = 0; v < (1L << w); ++v) {
      std::vector<int> bits = prefix;
      for (int j = 0; j < pad; ++j) bits.push_back(0);
      std::vector<int> tail = to_bits(v, w);
      bits.insert(bits.end(), tail.begin(), tail.end());
      layout.names[canonical_indexed_name(base, to_bits(v, w))] = bits;
    }
  }
  return layout;
}

// P(X0 = x0 and X_j = bits_j ...) with concrete or dummy bits
ProbTermPtr tuple_prob(long x0, const std::vector<EventValue>& bits) {
  std::vector<EventPtr> atoms;
  atoms.push_back(e_eq("X0", x0));
  for (size_t j = 0; j < bits.size(); ++j)
    atoms.push_back(e_eq("X" + std::to_string(j + 1), bits[j]));
  return p_prob(e_and_all(atoms));
}

struct SumviProbTranslator {
  const VariableLayout& layout;

  ProbTermPtr var_term(const std::vector<EventValue>& bits) const {
    return p_sub(tuple_prob(1, bits), tuple_prob(2, bits));
  }

  std::vector<EventValue> bits_of_name(const std::string& name) const {
    auto it = layout.names.find(name);
    if (it == layout.names.end()) fail(Err::UnboundVariable, "no layout slot for '" + name + "'");
    std::vector<EventValue> out;
    for (int b : it->second) out.emplace_back(static_cast<long>(b));
    return out;
  }

  ProbTermPtr translate(const TermPtr& t, const std::set<std::string>& binders) const {
    switch (t->kind) {
      case TermKind::Const: {
        if (!t->value.is_integer())
          fail(Err::IllFormed, "clear denominators before the probabilistic encoding");
        long k = t->value.to_long();
        return k < 0 ? p_neg(encode_integer(-k)) : encode_integer(k);
      }
      case TermKind::Var: {
        if (!t->var.is_indexed()) {
          if (binders.count(t->var.base))
            fail(Err::UnsupportedAtom,
                 "binder '" + t->var.base + "' used as a value; expand that summation instead");
          return var_term(bits_of_name(t->var.base));
        }
        const auto& fam = layout.families.find(t->var.base);
        if (fam == layout.families.end())
          fail(Err::UnboundVariable, "no layout for family '" + t->var.base + "'");
        const auto& [prefix, pad] = fam->second;
        std::vector<EventValue> bits;
        for (int b : prefix) bits.emplace_back(static_cast<long>(b));
        for (int j = 0; j < pad; ++j) bits.emplace_back(static_cast<long>(0));
        for (const auto& e : t->var.index) {
          if (e->kind == TermKind::Const)
            bits.emplace_back(e->value.to_long());
          else
            bits.emplace_back(e->var.base);  // binder dummy
        }
        return var_term(bits);
      }
      case TermKind::Neg:
        return p_neg(translate(t->a, binders));
      case TermKind::Add:
        return p_add(translate(t->a, binders), translate(t->b, binders));
      case TermKind::Mul:
        return p_mul(translate(t->a, binders), translate(t->b, binders));
      case TermKind::Sum: {
        if (uses_binder_as_value(t->a, t->binder)) {
          // binder occurs arithmetically: expand this summation concretely
          return p_add(translate(substitute(t->a, t->binder, 0), binders),
                       translate(substitute(t->a, t->binder, 1), binders));
        }
        std::set<std::string> inner = binders;
        inner.insert(t->binder);
        ProbTermPtr body = translate(t->a, inner);
        // sum over the ternary domain minus the spurious value-2 summand
        return p_sub(p_sum(t->binder, 3, body), substitute_dummy(body, t->binder, 2));
      }
      case TermKind::Prod:
        fail(Err::DialectViolation, "products do not occur in the vi dialects");
    }
    fail(Err::IllFormed, "unreachable term kind");
  }
};

}  // namespace

PassResult<ProbSatInstance> sumvi1_to_probsat(const EtrInstance& inst) {
  if (inst.dialect != Dialect::SigmaViEtr1)
    fail(Err::DialectViolation, "pass expects a sigma-vi-etr-1 instance");
  ValidationReport report = validate_dialect(inst);
  if (!report.ok()) fail(Err::DialectViolation, report.to_string());

  FormulaPtr cleared = clear_denominators(inst.formula);
  VariableLayout layout = layout_variables(inst);
  if (layout.width > 20) fail(Err::TooLarge, "index width beyond 20 bits");
  SumviProbTranslator tr{layout};

  std::function<ProbFormulaPtr(const FormulaPtr&)> go = [&](const FormulaPtr& f) -> ProbFormulaPtr {
    switch (f->kind) {
      case FormulaKind::Atom:
        return pf_atom(f->op, tr.translate(f->lhs, {}), tr.translate(f->rhs, {}));
      case FormulaKind::Not:
        return pf_not(go(f->f));
      case FormulaKind::And:
        return pf_and(go(f->f), go(f->g));
      case FormulaKind::Or:
        return pf_or(go(f->f), go(f->g));
    }
    fail(Err::IllFormed, "unreachable formula kind");
  };

  PassResult<ProbSatInstance> result;
  result.target.domain = 3;
  result.target.vars.push_back("X0");
  for (int j = 1; j <= layout.width; ++j) result.target.vars.push_back("X" + std::to_string(j));
  result.target.formula = go(cleared);
  result.notes = "index width N=" + std::to_string(layout.width);

  VariableLayout lay = layout;
  int width = layout.width;
  result.forward = [lay, width](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Rational alpha(0);
    for (const auto& [name, value] : w.assignment) {
      if (!lay.names.count(name)) fail(Err::UnknownVariable, "no layout slot for '" + name + "'");
      alpha += value.abs();
    }
    if (alpha > Rational(1)) fail(Err::IllFormed, "witness l1 norm exceeds 1");
    Distribution d;
    d.domain = 3;
    d.vars.push_back("X0");
    for (int j = 1; j <= width; ++j) d.vars.push_back("X" + std::to_string(j));
    for (const auto& [name, value] : w.assignment) {
      if (value.is_zero()) continue;
      std::vector<int> tuple;
      tuple.push_back(value.sign() > 0 ? 1 : 2);
      for (int b : lay.names.at(name)) tuple.push_back(b);
      d.entries[tuple] = value.abs();
    }
    Rational rest = Rational(1) - alpha;
    if (!rest.is_zero()) {
      Rational share = rest / Rational(mpq_class(pow2(width).num()));
      for (long v = 0; v < (1L << width); ++v) {
        std::vector<int> tuple;
        tuple.push_back(0);
        for (int b : to_bits(v, width)) tuple.push_back(b);
        d.entries[tuple] += share;
      }
    }
    validate_distribution(d);
    return Witness::of(std::move(d), "sumvi1_to_probsat forward");
  };
  result.backward = [lay](const Witness& w) {
    if (w.kind != WitnessKind::DistributionW) fail(Err::KindMismatch, "expected a distribution witness");
    auto mass = [&w](std::vector<int> tuple) {
      auto it = w.distribution.entries.find(tuple);
      return it == w.distribution.entries.end() ? Rational(0) : it->second;
    };
    Assignment out;
    for (const auto& [name, bits] : lay.names) {
      std::vector<int> plus{1}, minus{2};
      plus.insert(plus.end(), bits.begin(), bits.end());
      minus.insert(minus.end(), bits.begin(), bits.end());
      Rational v = mass(plus) - mass(minus);
      if (!v.is_zero()) out[name] = v;
    }
    return Witness::of(std::move(out), "sumvi1_to_probsat backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// event arithmetization and normalization

namespace {

// Lagrange basis over 0..c-1: 1 at `at`, 0 at the other integer points.
TermPtr lagrange_at(const TermPtr& x, long at, int c) {
  Rational denom(1);
  TermPtr num = t_int(1);
  bool first = true;
  for (long u = 0; u < c; ++u) {
    if (u == at) continue;
    TermPtr factor = t_sub(x, t_int(u));
    num = first ? factor : t_mul(num, factor);
    first = false;
    denom *= Rational(at - u);
  }
  if (first) return t_int(1);
  return t_mul(t_const(Rational(1) / denom), num);
}

// [x = y] for two 0..c-1 valued terms.
TermPtr equality_indicator(const TermPtr& x, const TermPtr& y, int c) {
  if (c == 2) {
    TermPtr diff = t_sub(x, y);
    return one_minus(t_mul(diff, diff));
  }
  TermPtr acc;
  for (long v = 0; v < c; ++v) {
    TermPtr part = t_mul(lagrange_at(x, v, c), lagrange_at(y, v, c));
    acc = acc ? t_add(acc, part) : part;
  }
  return acc;
}

TermPtr event_value_term(const EventValue& v) {
  if (const long* n = std::get_if<long>(&v)) return t_int(*n);
  return t_var(std::get<std::string>(v));
}

}  // namespace

TermPtr arithmetize_event(const EventPtr& ev, const std::vector<std::string>& vars, int c) {
  switch (ev->kind) {
    case EventKind::Top:
      return t_int(1);
    case EventKind::AtomEq: {
      if (std::find(vars.begin(), vars.end(), ev->var) == vars.end())
        fail(Err::UnknownVariable, "random variable '" + ev->var + "'");
      if (const long* v = std::get_if<long>(&ev->value)) {
        if (*v < 0 || *v >= c)
          fail(Err::ValueOutOfDomain, "event value " + std::to_string(*v) + " outside 0.." +
                                          std::to_string(c - 1));
        if (c == 2) {
          TermPtr diff = t_sub(t_var(ev->var), t_int(*v));
          return one_minus(t_mul(diff, diff));
        }
        return lagrange_at(t_var(ev->var), *v, c);
      }
      return equality_indicator(t_var(ev->var), event_value_term(ev->value), c);
    }
    case EventKind::Not:
      return one_minus(arithmetize_event(ev->f, vars, c));
    case EventKind::And:
      return t_mul(arithmetize_event(ev->f, vars, c), arithmetize_event(ev->g, vars, c));
  }
  fail(Err::IllFormed, "unreachable event kind");
}

namespace {

struct EventAnalysis {
  // per variable: concrete values are fine in any position; a dummy pin must
  // be a single positive conjunctive occurrence
  std::map<std::string, std::string> dummy_pins;
  std::set<std::string> concrete_vars;
};

void analyze_event(const EventPtr& ev, bool conjunctive_positive, EventAnalysis& out) {
  switch (ev->kind) {
    case EventKind::Top:
      return;
    case EventKind::AtomEq: {
      if (std::get_if<long>(&ev->value)) {
        out.concrete_vars.insert(ev->var);
        return;
      }
      const std::string& dummy = std::get<std::string>(ev->value);
      if (!conjunctive_positive)
        fail(Err::UnsupportedAtom,
             "summation dummies may only appear positively and conjunctively in events");
      auto [it, inserted] = out.dummy_pins.emplace(ev->var, dummy);
      if (!inserted && it->second != dummy)
        fail(Err::UnsupportedAtom, "variable '" + ev->var + "' pinned to two different dummies");
      return;
    }
    case EventKind::Not:
      analyze_event(ev->f, false, out);
      return;
    case EventKind::And:
      analyze_event(ev->f, conjunctive_positive, out);
      analyze_event(ev->g, conjunctive_positive, out);
      return;
  }
}

bool eval_event_concrete(const EventPtr& ev, const std::map<std::string, long>& values) {
  switch (ev->kind) {
    case EventKind::Top:
      return true;
    case EventKind::AtomEq: {
      if (const long* v = std::get_if<long>(&ev->value)) {
        auto it = values.find(ev->var);
        if (it == values.end()) fail(Err::IllFormed, "missing valuation");
        return it->second == *v;
      }
      return true;  // dummy pin: satisfied on the pinned tuples by construction
    }
    case EventKind::Not:
      return !eval_event_concrete(ev->f, values);
    case EventKind::And:
      return eval_event_concrete(ev->f, values) && eval_event_concrete(ev->g, values);
  }
  return false;
}

void collect_dummies_term(const ProbTermPtr& t, std::set<std::string>& out);

void collect_dummies_event(const EventPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case EventKind::Top:
      return;
    case EventKind::AtomEq:
      if (const std::string* d = std::get_if<std::string>(&e->value)) out.insert(*d);
      return;
    case EventKind::Not:
      collect_dummies_event(e->f, out);
      return;
    case EventKind::And:
      collect_dummies_event(e->f, out);
      collect_dummies_event(e->g, out);
      return;
  }
}

void collect_dummies_term(const ProbTermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case ProbTermKind::Prob:
      collect_dummies_event(t->event, out);
      return;
    case ProbTermKind::Neg:
      collect_dummies_term(t->a, out);
      return;
    case ProbTermKind::Add:
    case ProbTermKind::Mul:
      collect_dummies_term(t->a, out);
      collect_dummies_term(t->b, out);
      return;
    case ProbTermKind::Sum:
      out.insert(t->binder);
      collect_dummies_term(t->a, out);
      return;
  }
}

void collect_dummies_formula(const ProbFormulaPtr& f, std::set<std::string>& out) {
  switch (f->kind) {
    case ProbFormulaKind::Atom:
      collect_dummies_term(f->lhs, out);
      collect_dummies_term(f->rhs, out);
      return;
    case ProbFormulaKind::Not:
      collect_dummies_formula(f->f, out);
      return;
    case ProbFormulaKind::And:
    case ProbFormulaKind::Or:
      collect_dummies_formula(f->f, out);
      collect_dummies_formula(f->g, out);
      return;
  }
}

class Normalizer {
public:
  Normalizer(const std::vector<std::string>& vars, int c, std::set<std::string> taken)
      : vars_(vars), c_(c), taken_(std::move(taken)) {}

  ProbTermPtr term(const ProbTermPtr& t) {
    switch (t->kind) {
      case ProbTermKind::Prob:
        return rewrite_primitive(t->event);
      case ProbTermKind::Neg:
        return p_neg(term(t->a));
      case ProbTermKind::Add:
        return p_add(term(t->a), term(t->b));
      case ProbTermKind::Mul:
        return p_mul(term(t->a), term(t->b));
      case ProbTermKind::Sum:
        return p_sum(t->binder, t->domain, term(t->a));
    }
    fail(Err::IllFormed, "unreachable probabilistic term kind");
  }

  ProbFormulaPtr formula(const ProbFormulaPtr& f) {
    switch (f->kind) {
      case ProbFormulaKind::Atom:
        return pf_atom(f->op, term(f->lhs), term(f->rhs));
      case ProbFormulaKind::Not:
        return pf_not(formula(f->f));
      case ProbFormulaKind::And:
        return pf_and(formula(f->f), formula(f->g));
      case ProbFormulaKind::Or:
        return pf_or(formula(f->f), formula(f->g));
    }
    fail(Err::IllFormed, "unreachable probabilistic formula kind");
  }

private:
  ProbTermPtr rewrite_primitive(const EventPtr& ev) {
    EventAnalysis info;
    analyze_event(ev, true, info);
    for (const auto& [var, dummy] : info.dummy_pins) {
      (void)dummy;
      if (info.concrete_vars.count(var))
        fail(Err::UnsupportedAtom,
             "variable '" + var + "' is both dummy-pinned and concretely constrained");
    }
    std::vector<std::string> expand_vars;
    for (const auto& v : vars_)
      if (info.concrete_vars.count(v)) expand_vars.push_back(v);
    if (expand_vars.size() > 12) fail(Err::TooLarge, "too many constrained variables to expand");

    // fresh summation dummies for the unconstrained variables
    std::map<std::string, std::string> sum_dummies;
    for (const auto& v : vars_) {
      if (info.concrete_vars.count(v) || info.dummy_pins.count(v)) continue;
      std::string name = fresh_name("d" + std::to_string(sum_dummies.size() + 1), taken_);
      taken_.insert(name);
      sum_dummies[v] = name;
    }

    // enumerate valuations of the concretely constrained variables
    std::vector<ProbTermPtr> summands;
    std::map<std::string, long> values;
    std::function<void(size_t)> enumerate = [&](size_t i) {
      if (i == expand_vars.size()) {
        if (!eval_event_concrete(ev, values)) return;
        std::vector<EventPtr> atoms;
        for (const auto& v : vars_) {
          if (auto it = values.find(v); it != values.end())
            atoms.push_back(e_eq(v, it->second));
          else if (auto pin = info.dummy_pins.find(v); pin != info.dummy_pins.end())
            atoms.push_back(e_eq_dummy(v, pin->second));
          else
            atoms.push_back(e_eq_dummy(v, sum_dummies.at(v)));
        }
        summands.push_back(p_prob(e_and_all(atoms)));
        return;
      }
      for (long v = 0; v < c_; ++v) {
        values[expand_vars[i]] = v;
        enumerate(i + 1);
      }
      values.erase(expand_vars[i]);
    };
    enumerate(0);

    ProbTermPtr acc;
    if (summands.empty()) {
      acc = encode_zero();
    } else {
      acc = summands[0];
      for (size_t i = 1; i < summands.size(); ++i) acc = p_add(acc, summands[i]);
    }
    // bind the fresh dummies, innermost = last variable
    for (auto it = vars_.rbegin(); it != vars_.rend(); ++it)
      if (auto d = sum_dummies.find(*it); d != sum_dummies.end()) acc = p_sum(d->second, c_, acc);
    return acc;
  }

  const std::vector<std::string>& vars_;
  int c_;
  std::set<std::string> taken_;
};

}  // namespace

ProbFormulaPtr normalize_prob_primitives(const ProbFormulaPtr& f,
                                         const std::vector<std::string>& vars, int c) {
  std::set<std::string> taken;
  collect_dummies_formula(f, taken);
  Normalizer n(vars, c, std::move(taken));
  return n.formula(f);
}

// ---------------------------------------------------------------------------
// smsat_to_sigmaetr

namespace {

// The event must be a conjunction spine pinning every variable exactly once,
// in instance order, to a concrete value or a dummy.
bool full_tuple_values(const EventPtr& ev, const std::vector<std::string>& vars,
                       std::vector<EventValue>* out) {
  std::vector<const EventFormula*> atoms;
  std::function<bool(const EventPtr&)> flatten = [&](const EventPtr& e) {
    if (e->kind == EventKind::And) return flatten(e->f) && flatten(e->g);
    if (e->kind == EventKind::AtomEq) {
      atoms.push_back(e.get());
      return true;
    }
    return false;
  };
  if (!flatten(ev)) return false;
  if (atoms.size() != vars.size()) return false;
  for (size_t i = 0; i < vars.size(); ++i) {
    if (atoms[i]->var != vars[i]) return false;
    out->push_back(atoms[i]->value);
  }
  return true;
}

}  // namespace

PassResult<EtrInstance> smsat_to_sigmaetr(const ProbSatInstance& inst, long p) {
  if (p < 0) fail(Err::IllFormed, "support bound must be nonnegative");
  int c = inst.domain;
  size_t n = inst.vars.size();
  auto mass_var = [](long i) { return "X" + std::to_string(i); };
  auto sel_var = [](long i, size_t j) {
    return "e" + std::to_string(i) + "_" + std::to_string(j + 1);
  };

  // X(values) = sum_i X_i * prod_j [value_j = e_{i,j}]
  auto array_term = [&](const std::vector<EventValue>& values) -> TermPtr {
    TermPtr acc;
    for (long i = 1; i <= p; ++i) {
      TermPtr row = t_var(mass_var(i));
      for (size_t j = 0; j < n; ++j) {
        TermPtr want = event_value_term(values[j]);
        TermPtr sel = t_var(sel_var(i, j));
        TermPtr ind;
        if (const long* v = std::get_if<long>(&values[j]))
          ind = c == 2 ? equality_indicator(want, sel, 2) : lagrange_at(sel, *v, c);
        else
          ind = equality_indicator(want, sel, c);
        row = t_mul(row, ind);
      }
      acc = acc ? t_add(acc, row) : row;
    }
    return acc ? acc : t_int(0);
  };

  std::function<TermPtr(const ProbTermPtr&)> tr_term = [&](const ProbTermPtr& t) -> TermPtr {
    switch (t->kind) {
      case ProbTermKind::Prob: {
        std::vector<EventValue> values;
        if (!full_tuple_values(t->event, inst.vars, &values))
          fail(Err::NotNormalized, "basic term is not a full-tuple primitive; normalize first");
        return array_term(values);
      }
      case ProbTermKind::Neg:
        return t_neg(tr_term(t->a));
      case ProbTermKind::Add:
        return t_add(tr_term(t->a), tr_term(t->b));
      case ProbTermKind::Mul:
        return t_mul(tr_term(t->a), tr_term(t->b));
      case ProbTermKind::Sum: {
        if (t->domain != c) fail(Err::IllFormed, "summation domain mismatch");
        if (c == 2) return t_sum(t->binder, 2, tr_term(t->a));
        TermPtr acc;
        for (long v = 0; v < c; ++v) {
          TermPtr part = tr_term(substitute_dummy(t->a, t->binder, v));
          acc = acc ? t_add(acc, part) : part;
        }
        return acc;
      }
    }
    fail(Err::IllFormed, "unreachable probabilistic term kind");
  };
  std::function<FormulaPtr(const ProbFormulaPtr&)> tr_formula =
      [&](const ProbFormulaPtr& f) -> FormulaPtr {
    switch (f->kind) {
      case ProbFormulaKind::Atom:
        return f_atom(f->op, tr_term(f->lhs), tr_term(f->rhs));
      case ProbFormulaKind::Not:
        return f_not(tr_formula(f->f));
      case ProbFormulaKind::And:
        return f_and(tr_formula(f->f), tr_formula(f->g));
      case ProbFormulaKind::Or:
        return f_or(tr_formula(f->f), tr_formula(f->g));
    }
    fail(Err::IllFormed, "unreachable probabilistic formula kind");
  };

  std::vector<FormulaPtr> parts;
  parts.push_back(tr_formula(inst.formula));
  // selector domains, nonnegative masses, total mass one
  for (long i = 1; i <= p; ++i) {
    for (size_t j = 0; j < n; ++j) {
      TermPtr prod;
      for (long d = 0; d < c; ++d) {
        TermPtr factor = t_sub(t_var(sel_var(i, j)), t_int(d));
        prod = prod ? t_mul(prod, factor) : factor;
      }
      parts.push_back(f_eq(prod, t_int(0)));
    }
    parts.push_back(f_le(t_int(0), t_var(mass_var(i))));
  }
  TermPtr total;
  for (long i = 1; i <= p; ++i)
    total = total ? t_add(total, t_var(mass_var(i))) : t_var(mass_var(i));
  parts.push_back(f_eq(total ? total : t_int(0), t_int(1)));

  PassResult<EtrInstance> result;
  result.target.dialect = Dialect::SigmaEtr;
  result.target.formula = f_and_all(parts);
  for (long i = 1; i <= p; ++i) {
    result.target.declared_vars.insert(mass_var(i));
    for (size_t j = 0; j < n; ++j) result.target.declared_vars.insert(sel_var(i, j));
  }
  result.notes = "p=" + std::to_string(p);

  long pp = p;
  size_t nn = n;
  int cc = c;
  std::vector<std::string> vars = inst.vars;
  result.forward = [pp, nn](const Witness& w) {
    if (w.kind != WitnessKind::DistributionW) fail(Err::KindMismatch, "expected a distribution witness");
    validate_distribution(w.distribution);
    if (support_size(w.distribution) > pp)
      fail(Err::IllFormed, "distribution support exceeds the bound p");
    Assignment out;
    long i = 1;
    for (const auto& [tuple, mass] : w.distribution.entries) {
      if (mass.is_zero()) continue;
      out["X" + std::to_string(i)] = mass;
      for (size_t j = 0; j < nn; ++j)
        out["e" + std::to_string(i) + "_" + std::to_string(j + 1)] = Rational(tuple[j]);
      ++i;
    }
    for (; i <= pp; ++i) {
      out["X" + std::to_string(i)] = Rational(0);
      for (size_t j = 0; j < nn; ++j)
        out["e" + std::to_string(i) + "_" + std::to_string(j + 1)] = Rational(0);
    }
    return Witness::of(std::move(out), "smsat_to_sigmaetr forward");
  };
  result.backward = [pp, nn, cc, vars](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Distribution d;
    d.vars = vars;
    d.domain = cc;
    for (long i = 1; i <= pp; ++i) {
      auto xm = w.assignment.find("X" + std::to_string(i));
      if (xm == w.assignment.end()) fail(Err::UnboundVariable, "witness lacks X" + std::to_string(i));
      if (xm->second.is_zero()) continue;
      std::vector<int> tuple;
      for (size_t j = 0; j < nn; ++j) {
        auto sel = w.assignment.find("e" + std::to_string(i) + "_" + std::to_string(j + 1));
        if (sel == w.assignment.end()) fail(Err::UnboundVariable, "witness lacks a selector");
        if (!sel->second.is_integer()) fail(Err::IllFormed, "selector value is not an integer");
        long v = sel->second.to_long();
        if (v < 0 || v >= cc) fail(Err::ValueOutOfDomain, "selector value outside the domain");
        tuple.push_back(static_cast<int>(v));
      }
      d.entries[tuple] += xm->second;
    }
    validate_distribution(d);
    return Witness::of(std::move(d), "smsat_to_sigmaetr backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// sigmaetr_half_to_smsat

PassResult<ProbSatInstance> sigmaetr_half_to_smsat(const EtrInstance& inst) {
  if (inst.dialect != Dialect::SigmaEtrHalf)
    fail(Err::DialectViolation, "pass expects a sigma-etr-half instance");
  ValidationReport report = validate_dialect(inst);
  if (!report.ok()) fail(Err::DialectViolation, report.to_string());

  FormulaPtr cleared = clear_denominators(inst.formula);
  std::vector<std::string> xs;
  for (const auto& v : free_vars(cleared)) xs.push_back(v);
  size_t n = std::max<size_t>(xs.size(), 1);

  // ternary random variables X1..Xn and E
  auto xname = [](size_t i) { return "X" + std::to_string(i + 1); };

  // q_e = P(X1=0,...,Xn=0,E=e); p_i = P(...,Xi=1,...,E=0) - P(...,Xi=2,...,E=0)
  auto q_term = [&](EventValue e) {
    std::vector<EventPtr> atoms;
    for (size_t j = 0; j < n; ++j) atoms.push_back(e_eq(xname(j), 0));
    atoms.push_back(e_eq("E", std::move(e)));
    return p_prob(e_and_all(atoms));
  };
  auto p_term_for = [&](size_t i, long sign_value) {
    std::vector<EventPtr> atoms;
    for (size_t j = 0; j < n; ++j) atoms.push_back(e_eq(xname(j), j == i ? sign_value : 0));
    atoms.push_back(e_eq("E", 0L));
    return p_prob(e_and_all(atoms));
  };
  std::map<std::string, size_t> xpos;
  for (size_t i = 0; i < xs.size(); ++i) xpos[xs[i]] = i;

  std::function<ProbTermPtr(const TermPtr&, const std::set<std::string>&)> tr =
      [&](const TermPtr& t, const std::set<std::string>& binders) -> ProbTermPtr {
    switch (t->kind) {
      case TermKind::Const: {
        if (!t->value.is_integer()) fail(Err::IllFormed, "denominators were not cleared");
        long k = t->value.to_long();
        return k < 0 ? p_neg(encode_integer(-k)) : encode_integer(k);
      }
      case TermKind::Var: {
        if (t->var.is_indexed()) fail(Err::DialectViolation, "indexing is not available here");
        if (binders.count(t->var.base)) {
          // binder value e is simulated by 2 * q_e
          ProbTermPtr q = q_term(EventValue(t->var.base));
          return p_add(q, q);
        }
        size_t i = xpos.at(t->var.base);
        return p_sub(p_term_for(i, 1), p_term_for(i, 2));
      }
      case TermKind::Neg:
        return p_neg(tr(t->a, binders));
      case TermKind::Add:
        return p_add(tr(t->a, binders), tr(t->b, binders));
      case TermKind::Mul:
        return p_mul(tr(t->a, binders), tr(t->b, binders));
      case TermKind::Sum: {
        std::set<std::string> inner = binders;
        inner.insert(t->binder);
        ProbTermPtr body = tr(t->a, inner);
        // ternary summation minus the spurious e = 2 summand
        return p_sub(p_sum(t->binder, 3, body), substitute_dummy(body, t->binder, 2));
      }
      case TermKind::Prod:
        fail(Err::DialectViolation, "products are not part of sigma-etr");
    }
    fail(Err::IllFormed, "unreachable term kind");
  };

  std::function<ProbFormulaPtr(const FormulaPtr&)> go = [&](const FormulaPtr& f) -> ProbFormulaPtr {
    switch (f->kind) {
      case FormulaKind::Atom:
        return pf_atom(f->op, tr(f->lhs, {}), tr(f->rhs, {}));
      case FormulaKind::Not:
        return pf_not(go(f->f));
      case FormulaKind::And:
        return pf_and(go(f->f), go(f->g));
      case FormulaKind::Or:
        return pf_or(go(f->f), go(f->g));
    }
    fail(Err::IllFormed, "unreachable formula kind");
  };

  std::vector<ProbFormulaPtr> parts;
  parts.push_back(go(cleared));
  parts.push_back(pf_atom(CmpOp::Eq, q_term(EventValue(0L)), encode_zero()));
  ProbTermPtr q1 = q_term(EventValue(1L));
  parts.push_back(pf_atom(CmpOp::Eq, p_add(q1, q1), encode_integer(1)));

  PassResult<ProbSatInstance> result;
  result.target.domain = 3;
  for (size_t j = 0; j < n; ++j) result.target.vars.push_back(xname(j));
  result.target.vars.push_back("E");
  result.target.formula = pf_and_all(parts);
  result.target.small_model_p = static_cast<long>(n) + 2;
  result.notes = "support bound p=" + std::to_string(n + 2);

  std::vector<std::string> xvars = xs;
  size_t nn = n;
  result.forward = [xvars, nn](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Rational alpha(0);
    for (const auto& x : xvars) {
      auto it = w.assignment.find(x);
      if (it != w.assignment.end()) alpha += it->second.abs();
    }
    if (alpha > Rational(1, 2)) fail(Err::IllFormed, "witness l1 norm exceeds 1/2");
    Distribution d;
    d.domain = 3;
    for (size_t j = 0; j < nn; ++j) d.vars.push_back("X" + std::to_string(j + 1));
    d.vars.push_back("E");
    auto tuple_for = [nn](size_t i, int value, int e) {
      std::vector<int> tuple(nn + 1, 0);
      tuple[i] = value;
      tuple[nn] = e;
      return tuple;
    };
    for (size_t i = 0; i < xvars.size(); ++i) {
      auto it = w.assignment.find(xvars[i]);
      if (it == w.assignment.end() || it->second.is_zero()) continue;
      d.entries[tuple_for(i, it->second.sign() > 0 ? 1 : 2, 0)] = it->second.abs();
    }
    d.entries[tuple_for(0, 0, 1)] = Rational(1, 2);  // the q1 anchor
    Rational rest = Rational(1, 2) - alpha;
    if (!rest.is_zero()) d.entries[tuple_for(0, 0, 2)] = rest;
    validate_distribution(d);
    return Witness::of(std::move(d), "sigmaetr_half_to_smsat forward");
  };
  result.backward = [xvars, nn](const Witness& w) {
    if (w.kind != WitnessKind::DistributionW) fail(Err::KindMismatch, "expected a distribution witness");
    auto mass = [&w](const std::vector<int>& tuple) {
      auto it = w.distribution.entries.find(tuple);
      return it == w.distribution.entries.end() ? Rational(0) : it->second;
    };
    Assignment out;
    for (size_t i = 0; i < xvars.size(); ++i) {
      std::vector<int> plus(nn + 1, 0), minus(nn + 1, 0);
      plus[i] = 1;
      minus[i] = 2;
      Rational v = mass(plus) - mass(minus);
      if (!v.is_zero()) out[xvars[i]] = v;
    }
    return Witness::of(std::move(out), "sigmaetr_half_to_smsat backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// prenex_sums

namespace {

TermPtr rename_binder(const TermPtr& t, const std::string& from, const std::string& to) {
  switch (t->kind) {
    case TermKind::Const:
      return t;
    case TermKind::Var: {
      if (!t->var.is_indexed()) return t->var.base == from ? t_var(to) : t;
      std::vector<TermPtr> idx;
      for (const auto& e : t->var.index) idx.push_back(rename_binder(e, from, to));
      return t_ivar(t->var.base, std::move(idx));
    }
    case TermKind::Neg:
      return t_neg(rename_binder(t->a, from, to));
    case TermKind::Add:
      return t_add(rename_binder(t->a, from, to), rename_binder(t->b, from, to));
    case TermKind::Mul:
      return t_mul(rename_binder(t->a, from, to), rename_binder(t->b, from, to));
    case TermKind::Sum:
    case TermKind::Prod: {
      if (t->binder == from) return t;  // shadowed
      TermPtr body = rename_binder(t->a, from, to);
      return t->kind == TermKind::Sum ? t_sum(t->binder, t->domain, body)
                                      : t_prod(t->binder, t->domain, body);
    }
  }
  return t;
}

struct Prenexer {
  std::set<std::string>& taken;
  long binder_counter = 0;
  long max_z = 0;

  std::string z_name(long i) { return "Z" + std::to_string(i); }

  TermPtr scale_by_z(TermPtr t, long m) {
    if (m == 0) return t;
    max_z = std::max(max_z, m);
    return t_mul(std::move(t), t_var(z_name(m)));
  }

  std::pair<std::vector<std::string>, TermPtr> walk(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Const:
      case TermKind::Var:
        return {{}, t};
      case TermKind::Neg: {
        auto [binders, body] = walk(t->a);
        return {std::move(binders), t_neg(std::move(body))};
      }
      case TermKind::Sum: {
        std::string fresh = fresh_name("y" + std::to_string(++binder_counter), taken);
        taken.insert(fresh);
        auto [binders, body] = walk(t->a);
        body = rename_binder(body, t->binder, fresh);
        std::vector<std::string> all{fresh};
        all.insert(all.end(), binders.begin(), binders.end());
        return {std::move(all), std::move(body)};
      }
      case TermKind::Add: {
        auto [ba, pa] = walk(t->a);
        auto [bb, pb] = walk(t->b);
        if (ba.empty() && bb.empty()) return {{}, t_add(pa, pb)};
        // sum Y sum Y' (p * Z_{|Y'|} + p' * Z_{|Y|})
        TermPtr body = t_add(scale_by_z(pa, static_cast<long>(bb.size())),
                             scale_by_z(pb, static_cast<long>(ba.size())));
        std::vector<std::string> all = ba;
        all.insert(all.end(), bb.begin(), bb.end());
        return {std::move(all), std::move(body)};
      }
      case TermKind::Mul: {
        auto [ba, pa] = walk(t->a);
        auto [bb, pb] = walk(t->b);
        std::vector<std::string> all = ba;
        all.insert(all.end(), bb.begin(), bb.end());
        return {std::move(all), t_mul(pa, pb)};
      }
      case TermKind::Prod:
        fail(Err::DialectViolation, "products are not part of sigma-etr");
    }
    return {{}, t};
  }

  TermPtr prenex(const TermPtr& t) {
    auto [binders, body] = walk(t);
    return nest_sums(binders, std::move(body));
  }
};

}  // namespace

bool is_sum_prenex(const TermPtr& t) {
  TermPtr cur = t;
  while (cur->kind == TermKind::Sum) cur = cur->a;
  // below the outer sums no further Sum may occur
  std::function<bool(const TermPtr&)> sum_free = [&](const TermPtr& u) -> bool {
    switch (u->kind) {
      case TermKind::Const:
        return true;
      case TermKind::Var: {
        for (const auto& e : u->var.index)
          if (!sum_free(e)) return false;
        return true;
      }
      case TermKind::Neg:
        return sum_free(u->a);
      case TermKind::Add:
      case TermKind::Mul:
        return sum_free(u->a) && sum_free(u->b);
      case TermKind::Sum:
        return false;
      case TermKind::Prod:
        return sum_free(u->a);
    }
    return true;
  };
  return sum_free(cur);
}

PassResult<EtrInstance> prenex_sums(const EtrInstance& inst) {
  if (!(inst.dialect == Dialect::SigmaEtr || inst.dialect == Dialect::Etr ||
        inst.dialect == Dialect::SigmaEtrHalf))
    fail(Err::DialectViolation, "pass expects a sigma-etr instance");
  ValidationReport report = validate_dialect(inst);
  if (!report.ok()) fail(Err::DialectViolation, report.to_string());

  std::set<std::string> taken = collect_name_bases(inst.formula);
  // reserve the Z names up front so binder gensyms cannot collide
  for (long i = 1; i <= 64; ++i) taken.insert("Z" + std::to_string(i));
  Prenexer prenexer{taken};
  FormulaPtr transformed = map_atoms(inst.formula, [&](const FormulaPtr& atom) {
    return f_atom(atom->op, prenexer.prenex(atom->lhs), prenexer.prenex(atom->rhs));
  });
  std::vector<FormulaPtr> parts{transformed};
  if (prenexer.max_z >= 1)
    parts.push_back(f_eq(t_mul(t_int(2), t_var("Z1")), t_int(1)));
  for (long i = 2; i <= prenexer.max_z; ++i)
    parts.push_back(f_eq(t_mul(t_var("Z" + std::to_string(i)), t_int(2)),
                         t_var("Z" + std::to_string(i - 1))));

  PassResult<EtrInstance> result;
  result.target.dialect = inst.dialect == Dialect::Etr ? Dialect::SigmaEtr : inst.dialect;
  result.target.formula = f_and_all(parts);
  result.target.declared_vars = inst.declared_vars;
  result.target.candidates = inst.candidates;
  result.notes = "Z variables: " + std::to_string(prenexer.max_z);

  long max_z = prenexer.max_z;
  result.forward = [max_z](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out = w.assignment;
    for (long i = 1; i <= max_z; ++i) out["Z" + std::to_string(i)] = pow2(-i);
    return Witness::of(std::move(out), "prenex_sums forward");
  };
  result.backward = [max_z](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out = w.assignment;
    for (long i = 1; i <= max_z; ++i) out.erase("Z" + std::to_string(i));
    return Witness::of(std::move(out), "prenex_sums backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// remove_negations_formula and flatten_single_poly

FormulaPtr remove_negations_formula(const FormulaPtr& f) {
  std::function<FormulaPtr(const FormulaPtr&, bool)> go = [&](const FormulaPtr& g,
                                                              bool positive) -> FormulaPtr {
    switch (g->kind) {
      case FormulaKind::Atom: {
        const TermPtr& l = g->lhs;
        const TermPtr& r = g->rhs;
        switch (g->op) {
          case CmpOp::Lt:
            return positive ? f_lt(l, r) : f_or(f_lt(r, l), f_eq(l, r));
          case CmpOp::Le:
            return positive ? f_or(f_lt(l, r), f_eq(l, r)) : f_lt(r, l);
          case CmpOp::Eq:
            return positive ? f_eq(l, r) : f_or(f_lt(l, r), f_lt(r, l));
        }
        fail(Err::IllFormed, "unreachable comparison");
      }
      case FormulaKind::Not:
        return go(g->f, !positive);
      case FormulaKind::And: {
        FormulaPtr a = go(g->f, positive), b = go(g->g, positive);
        return positive ? f_and(a, b) : f_or(a, b);
      }
      case FormulaKind::Or: {
        FormulaPtr a = go(g->f, positive), b = go(g->g, positive);
        return positive ? f_or(a, b) : f_and(a, b);
      }
    }
    fail(Err::IllFormed, "unreachable formula kind");
  };
  return go(f, true);
}

namespace {

std::optional<Rational> rational_sqrt(const Rational& r) {
  if (r.sign() < 0) return std::nullopt;
  if (!mpz_perfect_square_p(r.num().get_mpz_t()) || !mpz_perfect_square_p(r.den().get_mpz_t()))
    return std::nullopt;
  mpz_class n, d;
  mpz_sqrt(n.get_mpz_t(), r.num().get_mpz_t());
  mpz_sqrt(d.get_mpz_t(), r.den().get_mpz_t());
  mpq_class q(n);
  q /= mpq_class(d);
  return Rational(q);
}

struct FlattenNode {
  enum class Kind { AtomEq, AtomLt, And, Or } kind;
  TermPtr lhs, rhs;  // atoms
  int child0 = -1, child1 = -1;
  std::string xi;       // node variable
  std::string xi_slack; // strict atoms only
};

}  // namespace

PassResult<EtrInstance> flatten_single_poly(const EtrInstance& inst) {
  std::set<std::string> taken = collect_name_bases(inst.formula);
  std::vector<FlattenNode> nodes;
  long counter = 0;

  std::function<int(const FormulaPtr&)> build = [&](const FormulaPtr& f) -> int {
    switch (f->kind) {
      case FormulaKind::Not:
        fail(Err::UnsupportedAtom, "negations must be removed before flattening");
      case FormulaKind::Atom: {
        if (f->op == CmpOp::Le)
          fail(Err::UnsupportedAtom, "atoms must use = or < only; rewrite <= first");
        FlattenNode node;
        node.kind = f->op == CmpOp::Eq ? FlattenNode::Kind::AtomEq : FlattenNode::Kind::AtomLt;
        node.lhs = f->lhs;
        node.rhs = f->rhs;
        node.xi = fresh_name("xi" + std::to_string(++counter), taken);
        taken.insert(node.xi);
        if (node.kind == FlattenNode::Kind::AtomLt) {
          node.xi_slack = fresh_name("xp" + std::to_string(counter), taken);
          taken.insert(node.xi_slack);
        }
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
      }
      case FormulaKind::And:
      case FormulaKind::Or: {
        int a = build(f->f);
        int b = build(f->g);
        FlattenNode node;
        node.kind = f->kind == FormulaKind::And ? FlattenNode::Kind::And : FlattenNode::Kind::Or;
        node.child0 = a;
        node.child1 = b;
        node.xi = fresh_name("xi" + std::to_string(++counter), taken);
        taken.insert(node.xi);
        nodes.push_back(node);
        return static_cast<int>(nodes.size()) - 1;
      }
    }
    fail(Err::IllFormed, "unreachable formula kind");
  };
  int root = build(inst.formula);

  std::vector<TermPtr> polys;
  for (const auto& node : nodes) {
    TermPtr xi = t_var(node.xi);
    switch (node.kind) {
      case FlattenNode::Kind::AtomEq:
        polys.push_back(t_sub(xi, t_sub(node.lhs, node.rhs)));
        break;
      case FlattenNode::Kind::AtomLt: {
        TermPtr slack = t_var(node.xi_slack);
        polys.push_back(t_sub(t_mul(t_sub(node.rhs, node.lhs), t_mul(slack, slack)),
                              one_minus(xi)));
        break;
      }
      case FlattenNode::Kind::And: {
        TermPtr a = t_var(nodes[node.child0].xi), b = t_var(nodes[node.child1].xi);
        polys.push_back(t_sub(xi, t_add(t_mul(a, a), t_mul(b, b))));
        break;
      }
      case FlattenNode::Kind::Or: {
        TermPtr a = t_var(nodes[node.child0].xi), b = t_var(nodes[node.child1].xi);
        polys.push_back(t_sub(xi, t_mul(a, b)));
        break;
      }
    }
  }
  polys.push_back(t_var(nodes[root].xi));

  TermPtr sum;
  for (const auto& poly : polys) {
    TermPtr sq = t_mul(poly, poly);
    sum = sum ? t_add(sum, sq) : sq;
  }

  PassResult<EtrInstance> result;
  result.target.dialect = inst.dialect;
  result.target.formula = f_eq(sum, t_int(0));
  result.target.declared_vars = inst.declared_vars;
  result.notes = "nodes=" + std::to_string(nodes.size());

  // Candidate annotations: enumerate the detected source grid and record the
  // achievable gadget values. Strict-atom slack values are enumerable only
  // when the gap is the square of a rational; other branches are dropped.
  auto source_candidates = detect_candidates(inst);
  std::set<std::string> src_vars = free_vars(inst.formula);
  bool annotatable = true;
  long grid = 1;
  std::vector<std::pair<std::string, std::vector<Rational>>> axes;
  for (const auto& name : src_vars) {
    auto it = source_candidates.find(name);
    if (it == source_candidates.end() || it->second.empty()) {
      annotatable = false;
      break;
    }
    if (grid > 4096 / static_cast<long>(it->second.size())) {
      annotatable = false;
      break;
    }
    grid *= static_cast<long>(it->second.size());
    axes.emplace_back(name, it->second);
  }
  if (annotatable) {
    result.target.candidates = source_candidates;
    std::map<std::string, std::set<Rational, std::less<Rational>>> values;
    Assignment a;
    std::function<void(size_t)> sweep = [&](size_t i) {
      if (i == axes.size()) {
        // per-node achievable values under this assignment
        std::vector<std::vector<Rational>> node_vals(nodes.size());
        for (size_t k = 0; k < nodes.size(); ++k) {
          const auto& node = nodes[k];
          switch (node.kind) {
            case FlattenNode::Kind::AtomEq:
              node_vals[k] = {eval_term(node.lhs, a) - eval_term(node.rhs, a)};
              values[node.xi].insert(node_vals[k][0]);
              break;
            case FlattenNode::Kind::AtomLt: {
              Rational gap = eval_term(node.rhs, a) - eval_term(node.lhs, a);
              node_vals[k] = {Rational(1)};
              values[node.xi].insert(Rational(1));
              values[node.xi_slack].insert(Rational(0));
              if (gap.sign() > 0) {
                if (auto root2 = rational_sqrt(gap)) {
                  node_vals[k].push_back(Rational(0));
                  values[node.xi].insert(Rational(0));
                  values[node.xi_slack].insert(Rational(1) / *root2);
                }
              }
              break;
            }
            case FlattenNode::Kind::And: {
              std::set<Rational> set;
              for (const auto& u : node_vals[node.child0])
                for (const auto& w : node_vals[node.child1]) set.insert(u * u + w * w);
              node_vals[k].assign(set.begin(), set.end());
              for (const auto& v : node_vals[k]) values[node.xi].insert(v);
              break;
            }
            case FlattenNode::Kind::Or: {
              std::set<Rational> set;
              for (const auto& u : node_vals[node.child0])
                for (const auto& w : node_vals[node.child1]) set.insert(u * w);
              node_vals[k].assign(set.begin(), set.end());
              for (const auto& v : node_vals[k]) values[node.xi].insert(v);
              break;
            }
          }
          if (node_vals[k].size() > 64) {
            annotatable = false;
            return;
          }
        }
        return;
      }
      for (const auto& v : axes[i].second) {
        a[axes[i].first] = v;
        sweep(i + 1);
        if (!annotatable) return;
      }
      a.erase(axes[i].first);
    };
    sweep(0);
    if (annotatable) {
      for (const auto& [name, set] : values)
        result.target.candidates[name] = std::vector<Rational>(set.begin(), set.end());
    } else {
      result.target.candidates.clear();
      result.notes += "; gadget value sets too large to annotate";
    }
  }

  std::vector<FlattenNode> nds = nodes;
  int rt = root;
  result.forward = [nds, rt](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out = w.assignment;
    std::vector<Rational> val(nds.size());
    for (size_t k = 0; k < nds.size(); ++k) {
      const auto& node = nds[k];
      switch (node.kind) {
        case FlattenNode::Kind::AtomEq:
          val[k] = eval_term(node.lhs, w.assignment) - eval_term(node.rhs, w.assignment);
          break;
        case FlattenNode::Kind::AtomLt: {
          Rational gap = eval_term(node.rhs, w.assignment) - eval_term(node.lhs, w.assignment);
          if (gap.sign() > 0) {
            auto root2 = rational_sqrt(gap);
            if (!root2)
              fail(Err::IllFormed,
                   "strict-atom gap " + gap.str() + " has no rational square root; transport is partial");
            val[k] = Rational(0);
            out[node.xi_slack] = Rational(1) / *root2;
          } else {
            val[k] = Rational(1);
            out[node.xi_slack] = Rational(0);
          }
          break;
        }
        case FlattenNode::Kind::And: {
          Rational u = val[node.child0], v = val[node.child1];
          val[k] = u * u + v * v;
          break;
        }
        case FlattenNode::Kind::Or:
          val[k] = val[node.child0] * val[node.child1];
          break;
      }
      out[node.xi] = val[k];
    }
    if (!val[rt].is_zero()) fail(Err::IllFormed, "witness does not satisfy the source instance");
    return Witness::of(std::move(out), "flatten_single_poly forward");
  };
  std::set<std::string> fresh_names;
  for (const auto& node : nodes) {
    fresh_names.insert(node.xi);
    if (!node.xi_slack.empty()) fresh_names.insert(node.xi_slack);
  }
  result.backward = [fresh_names](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    Assignment out;
    for (const auto& [name, value] : w.assignment)
      if (!fresh_names.count(name)) out[name] = value;
    return Witness::of(std::move(out), "flatten_single_poly backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// permanent

TermPtr one_indicator(const TermPtr& x, int m) {
  if (m < 1) fail(Err::IllFormed, "matrix size must be at least 1");
  Rational denom(1);
  TermPtr num;
  for (long k = 0; k <= m; ++k) {
    if (k == 1) continue;
    TermPtr factor = t_sub(x, t_int(k));
    num = num ? t_mul(num, factor) : factor;
    denom *= Rational(1 - k);
  }
  return t_mul(t_const(Rational(1) / denom), num);
}

namespace {

std::string matrix_entry(int mu, int nu) {
  return "M" + std::to_string(mu) + "_" + std::to_string(nu);
}

TermPtr permutation_indicator_over(int m, const std::function<TermPtr(int, int)>& entry) {
  TermPtr acc;
  for (int mu = 1; mu <= m; ++mu) {
    TermPtr row;
    for (int nu = 1; nu <= m; ++nu) row = row ? t_add(row, entry(mu, nu)) : entry(mu, nu);
    TermPtr p = one_indicator(row, m);
    acc = acc ? t_mul(acc, p) : p;
  }
  for (int nu = 1; nu <= m; ++nu) {
    TermPtr col;
    for (int mu = 1; mu <= m; ++mu) col = col ? t_add(col, entry(mu, nu)) : entry(mu, nu);
    acc = t_mul(acc, one_indicator(col, m));
  }
  return acc;
}

}  // namespace

TermPtr permutation_indicator(int m) {
  return permutation_indicator_over(m, [](int mu, int nu) { return t_var(matrix_entry(mu, nu)); });
}

TermPtr permanent_term(int m) {
  if (m < 1) fail(Err::IllFormed, "matrix size must be at least 1");
  auto entry = [](int mu, int nu) { return t_var(matrix_entry(mu, nu)); };
  TermPtr delta = permutation_indicator_over(m, entry);
  TermPtr weight;
  for (int mu = 1; mu <= m; ++mu) {
    TermPtr row;
    for (int nu = 1; nu <= m; ++nu) {
      TermPtr part = t_mul(entry(mu, nu), t_var("x" + std::to_string(mu) + "_" + std::to_string(nu)));
      row = row ? t_add(row, part) : part;
    }
    weight = weight ? t_mul(weight, row) : row;
  }
  TermPtr body = t_mul(delta, weight);
  for (int mu = m; mu >= 1; --mu)
    for (int nu = m; nu >= 1; --nu) body = t_sum(matrix_entry(mu, nu), 2, body);
  return body;
}

// ---------------------------------------------------------------------------
// succ18_to_leso

namespace {

std::vector<std::string> var_range(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

EsoFormulaPtr forall_all(const std::vector<std::string>& vars, EsoFormulaPtr body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = q_forall(*it, std::move(body));
  return body;
}

}  // namespace

PassResult<EsoInstance> succ18_to_leso(const Succ18Instance& inst) {
  validate_succ18(inst);
  int m = inst.equation_width();
  int n = inst.variable_width();
  std::vector<std::string> bvars = var_range("b", m);
  std::vector<std::string> evars = var_range("e", n);

  auto cfun = [](int i, int gate) {
    return "c" + std::to_string(i) + "_" + std::to_string(gate);
  };
  auto one = [] { return s_const(Rational(1)); };
  auto zero = [] { return s_const(Rational(0)); };
  auto eighth = [] { return s_const(Rational(1, 8)); };

  std::vector<EsoFormulaPtr> clauses;

  // id maps the domain atoms 0, 1 to the reals 0, 1
  clauses.push_back(q_forall(
      "u", q_and(q_or(q_rel("One", {"u"}, true), q_cmp(CmpOp::Eq, s_app("id", {"u"}), one())),
                 q_or(q_rel("One", {"u"}), q_cmp(CmpOp::Eq, s_app("id", {"u"}), zero())))));

  // range: forall e: 0 - 1/8 <= q(e) and q(e) <= 1/8
  clauses.push_back(forall_all(
      evars, q_and(q_cmp(CmpOp::Le, s_sub(zero(), eighth()), s_app("q", evars)),
                   q_cmp(CmpOp::Le, s_app("q", evars), eighth()))));

  // gate clauses per circuit
  for (int i = 0; i < 7; ++i) {
    const BoolCircuit& c = inst.circuits[i];
    for (size_t g = 0; g < c.gates.size(); ++g) {
      const Gate& gate = c.gates[g];
      EsoTermPtr value;
      switch (gate.op) {
        case Gate::Op::Input:
          value = s_app("id", {bvars[gate.input]});
          break;
        case Gate::Op::Not:
          value = s_sub(one(), s_app(cfun(i, gate.a), bvars));
          break;
        case Gate::Op::And:
          value = s_mul(s_app(cfun(i, gate.a), bvars), s_app(cfun(i, gate.b), bvars));
          break;
        case Gate::Op::Or:
          value = s_sub(one(), s_mul(s_sub(one(), s_app(cfun(i, gate.a), bvars)),
                                     s_sub(one(), s_app(cfun(i, gate.b), bvars))));
          break;
      }
      clauses.push_back(forall_all(
          bvars, q_cmp(CmpOp::Eq, s_app(cfun(i, static_cast<int>(g)), bvars), value)));
    }
  }

  // selectors: s_i(b, e) = prod_k (c_out_k(b) * id(e_k) + (1 - c_out_k(b)) * (1 - id(e_k)))
  std::vector<std::string> bevars = bvars;
  bevars.insert(bevars.end(), evars.begin(), evars.end());
  for (int i = 0; i < 7; ++i) {
    const BoolCircuit& c = inst.circuits[i];
    EsoTermPtr prod;
    for (int k = 0; k < n; ++k) {
      EsoTermPtr ck = s_app(cfun(i, c.outputs[k]), bvars);
      EsoTermPtr idk = s_app("id", {evars[k]});
      EsoTermPtr factor = s_add(s_mul(ck, idk), s_mul(s_sub(one(), ck), s_sub(one(), idk)));
      prod = prod ? s_mul(prod, factor) : factor;
    }
    std::string si = "s" + std::to_string(i);
    clauses.push_back(forall_all(bevars, q_cmp(CmpOp::Eq, s_app(si, bevars), prod)));
    // linking: y_i(b) * s_i(b, e) = q(e) * s_i(b, e)
    std::string yi = "y" + std::to_string(i);
    clauses.push_back(forall_all(
        bevars, q_cmp(CmpOp::Eq, s_mul(s_app(yi, bvars), s_app(si, bevars)),
                      s_mul(s_app("q", evars), s_app(si, bevars)))));
  }

  // the equation families
  clauses.push_back(forall_all(bvars, q_cmp(CmpOp::Eq, s_app("y0", bvars), eighth())));
  clauses.push_back(forall_all(
      bvars, q_cmp(CmpOp::Eq, s_add(s_app("y1", bvars), s_app("y2", bvars)), s_app("y3", bvars))));
  clauses.push_back(forall_all(
      bvars, q_cmp(CmpOp::Eq, s_mul(s_app("y4", bvars), s_app("y5", bvars)), s_app("y6", bvars))));

  EsoFormulaPtr body = q_and_all(clauses);
  // existsf prefix: q, id, then y_i, s_i and the gate functions
  std::vector<std::pair<std::string, int>> symbols;
  symbols.emplace_back("q", n);
  symbols.emplace_back("id", 1);
  for (int i = 0; i < 7; ++i) {
    symbols.emplace_back("y" + std::to_string(i), m);
    symbols.emplace_back("s" + std::to_string(i), m + n);
    for (size_t g = 0; g < inst.circuits[i].gates.size(); ++g)
      symbols.emplace_back(cfun(i, static_cast<int>(g)), m);
  }
  for (auto it = symbols.rbegin(); it != symbols.rend(); ++it)
    body = q_existsf(it->first, it->second, std::move(body));

  PassResult<EsoInstance> result;
  result.target.sentence = body;
  result.target.structure.domain = {"0", "1"};
  RelationTable one_rel;
  one_rel.arity = 1;
  one_rel.tuples.insert({1});
  result.target.structure.relations["One"] = one_rel;
  result.notes = "M=" + std::to_string(m) + " N=" + std::to_string(n);

  Succ18Instance circuits = inst;
  int mm = m, nn = n;
  result.forward = [circuits, mm, nn](const Witness& w) {
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    auto q_value = [&](const std::vector<bool>& bits) {
      std::vector<int> ibits(bits.begin(), bits.end());
      auto it = w.assignment.find(canonical_indexed_name("x", ibits));
      return it == w.assignment.end() ? Rational(0) : it->second;
    };
    EsoTables tables;
    auto atom = [](bool b) { return std::string(b ? "1" : "0"); };
    auto enumerate = [](int width, const std::function<void(const std::vector<bool>&)>& fn) {
      std::vector<bool> bits(width);
      for (long v = 0; v < (1L << width); ++v) {
        for (int j = 0; j < width; ++j) bits[j] = (v >> (width - 1 - j)) & 1;
        fn(bits);
      }
    };
    auto key_of = [&](const std::vector<bool>& bits) {
      std::vector<std::string> key;
      for (bool b : bits) key.push_back(atom(b));
      return key;
    };

    EsoTables::Table q;
    q.arity = nn;
    enumerate(nn, [&](const std::vector<bool>& e) { q.entries[key_of(e)] = q_value(e); });
    tables.tables["q"] = q;

    EsoTables::Table id;
    id.arity = 1;
    id.entries[{"0"}] = Rational(0);
    id.entries[{"1"}] = Rational(1);
    tables.tables["id"] = id;

    for (int i = 0; i < 7; ++i) {
      const BoolCircuit& c = circuits.circuits[i];
      // gate tables
      std::vector<EsoTables::Table> gates(c.gates.size());
      for (auto& t : gates) t.arity = mm;
      EsoTables::Table sel;
      sel.arity = mm + nn;
      EsoTables::Table y;
      y.arity = mm;
      enumerate(mm, [&](const std::vector<bool>& b) {
        std::vector<bool> vals(c.gates.size());
        for (size_t g = 0; g < c.gates.size(); ++g) {
          const Gate& gate = c.gates[g];
          switch (gate.op) {
            case Gate::Op::Input: vals[g] = b[gate.input]; break;
            case Gate::Op::Not: vals[g] = !vals[gate.a]; break;
            case Gate::Op::And: vals[g] = vals[gate.a] && vals[gate.b]; break;
            case Gate::Op::Or: vals[g] = vals[gate.a] || vals[gate.b]; break;
          }
          gates[g].entries[key_of(b)] = Rational(vals[g] ? 1 : 0);
        }
        std::vector<bool> out;
        for (int o : c.outputs) out.push_back(vals[o]);
        enumerate(nn, [&](const std::vector<bool>& e) {
          std::vector<std::string> key = key_of(b);
          for (bool bit : e) key.push_back(atom(bit));
          sel.entries[key] = Rational(out == e ? 1 : 0);
        });
        y.entries[key_of(b)] = q_value(out);
      });
      for (size_t g = 0; g < c.gates.size(); ++g)
        tables.tables["c" + std::to_string(i) + "_" + std::to_string(g)] = gates[g];
      tables.tables["s" + std::to_string(i)] = sel;
      tables.tables["y" + std::to_string(i)] = y;
    }
    return Witness::of(std::move(tables), "succ18_to_leso forward");
  };
  result.backward = [nn](const Witness& w) {
    if (w.kind != WitnessKind::EsoTablesW) fail(Err::KindMismatch, "expected table witness");
    auto it = w.tables.tables.find("q");
    if (it == w.tables.tables.end()) fail(Err::MissingTable, "witness lacks the q table");
    Assignment out;
    for (const auto& [key, value] : it->second.entries) {
      std::vector<int> bits;
      for (const auto& a : key) bits.push_back(a == "1" ? 1 : 0);
      if (static_cast<int>(bits.size()) != nn) fail(Err::IllFormed, "q table arity mismatch");
      out[canonical_indexed_name("x", bits)] = value;
    }
    return Witness::of(std::move(out), "succ18_to_leso backward");
  };
  return result;
}

// ---------------------------------------------------------------------------
// leso_leq_rewrite

namespace {

void collect_function_names(const EsoTermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->kind == EsoTermKind::App) out.insert(t->fn);
  collect_function_names(t->a, out);
  collect_function_names(t->b, out);
}

void collect_function_names(const EsoFormulaPtr& f, std::set<std::string>& out) {
  if (!f) return;
  if (f->kind == EsoFormulaKind::ExistsF) out.insert(f->var);
  collect_function_names(f->lhs, out);
  collect_function_names(f->rhs, out);
  collect_function_names(f->f, out);
  collect_function_names(f->g, out);
}

}  // namespace

EsoSentence leso_leq_rewrite(const EsoSentence& s) {
  std::set<std::string> taken;
  collect_function_names(s, taken);
  long counter = 0;
  std::vector<std::pair<std::string, std::string>> fresh;  // (eps, slack)

  std::function<EsoFormulaPtr(const EsoFormulaPtr&)> go = [&](const EsoFormulaPtr& f) -> EsoFormulaPtr {
    switch (f->kind) {
      case EsoFormulaKind::VarEq:
      case EsoFormulaKind::Rel:
        return f;
      case EsoFormulaKind::Cmp: {
        if (f->op != CmpOp::Le) return f;
        if (f->negated) fail(Err::UnsupportedAtom, "negated comparisons are outside the loose fragment");
        ++counter;
        std::string eps = fresh_name("eps" + std::to_string(counter), taken);
        taken.insert(eps);
        std::string slack = fresh_name("slack" + std::to_string(counter), taken);
        taken.insert(slack);
        fresh.emplace_back(eps, slack);
        // a <= b becomes a*eps + slack = b*eps
        return q_cmp(CmpOp::Eq,
                     s_add(s_mul(f->lhs, s_app(eps, {})), s_app(slack, {})),
                     s_mul(f->rhs, s_app(eps, {})));
      }
      case EsoFormulaKind::And:
        return q_and(go(f->f), go(f->g));
      case EsoFormulaKind::Or:
        return q_or(go(f->f), go(f->g));
      case EsoFormulaKind::Exists:
        return q_exists(f->var, go(f->f));
      case EsoFormulaKind::Forall:
        return q_forall(f->var, go(f->f));
      case EsoFormulaKind::ExistsF:
        return q_existsf(f->var, f->arity, go(f->f));
    }
    fail(Err::IllFormed, "unreachable ESO formula kind");
  };
  EsoFormulaPtr body = go(s);
  for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) {
    body = q_existsf(it->second, 0, std::move(body));
    body = q_existsf(it->first, 0, std::move(body));
  }
  return body;
}

// ---------------------------------------------------------------------------
// integer encodings

ProbTermPtr encode_zero() { return p_prob(e_not(e_top())); }

ProbTermPtr encode_integer(long k) {
  if (k < 0) fail(Err::IllFormed, "encode_integer takes nonnegative integers");
  if (k == 0) return encode_zero();
  std::function<ProbTermPtr(long)> rec = [&](long v) -> ProbTermPtr {
    if (v == 1) return p_prob(e_top());
    if (v % 2 == 1) return p_add(rec(v - 1), p_prob(e_top()));
    return p_mul(p_add(p_prob(e_top()), p_prob(e_top())), rec(v / 2));
  };
  return rec(k);
}

}  // namespace etrforge
