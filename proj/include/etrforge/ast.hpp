#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "etrforge/rational.hpp"

namespace etrforge {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// A variable reference: either a plain name or an indexed family access
// x_<i1,...,ik> whose index terms must resolve to bits under the enclosing
// summation binders. Indexed references only occur in the vi dialects.
struct VarRef {
  std::string base;
  std::vector<TermPtr> index;  // empty for a plain variable

  bool is_indexed() const { return !index.empty(); }
};

enum class TermKind { Const, Var, Neg, Add, Mul, Sum, Prod };

// Arithmetic term. Immutable after construction; nodes are shared freely.
// There is no subtraction node: a - b is Add(a, Neg(b)).
struct Term {
  TermKind kind;
  Rational value;      // Const
  VarRef var;          // Var
  TermPtr a, b;        // Neg/Sum/Prod use a only; Add/Mul use both
  std::string binder;  // Sum/Prod
  int domain = 0;      // Sum/Prod: binder ranges over 0..domain-1
};

TermPtr t_const(const Rational& v);
TermPtr t_int(long k);
TermPtr t_var(const std::string& name);
TermPtr t_ivar(const std::string& base, std::vector<TermPtr> index);
TermPtr t_neg(TermPtr a);
TermPtr t_add(TermPtr a, TermPtr b);
TermPtr t_sub(TermPtr a, TermPtr b);
TermPtr t_mul(TermPtr a, TermPtr b);
TermPtr t_sum(const std::string& binder, int domain, TermPtr body);
TermPtr t_prod(const std::string& binder, int domain, TermPtr body);

bool term_equal(const TermPtr& a, const TermPtr& b);

enum class CmpOp { Lt, Le, Eq };

enum class FormulaKind { Atom, Not, And, Or };

struct BoolFormula;
using FormulaPtr = std::shared_ptr<const BoolFormula>;

struct BoolFormula {
  FormulaKind kind;
  CmpOp op = CmpOp::Eq;  // Atom
  TermPtr lhs, rhs;      // Atom
  FormulaPtr f, g;       // Not uses f only; And/Or use both
};

FormulaPtr f_atom(CmpOp op, TermPtr lhs, TermPtr rhs);
FormulaPtr f_lt(TermPtr lhs, TermPtr rhs);
FormulaPtr f_le(TermPtr lhs, TermPtr rhs);
FormulaPtr f_eq(TermPtr lhs, TermPtr rhs);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr f, FormulaPtr g);
FormulaPtr f_or(FormulaPtr f, FormulaPtr g);

// Left-fold of f_and over a non-empty list.
FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

enum class Dialect {
  Etr,          // no summation, no products, no indexing
  SigmaEtr,     // unary binary-range summation
  PiEtr,        // unary binary-range product
  SigmaPiEtr,   // both
  SigmaViEtr,   // summation plus variable indexing
  SigmaViEtr1,  // SigmaViEtr with the l1 <= 1 solution requirement
  SigmaEtrHalf  // SigmaEtr with the l1 <= 1/2 solution requirement
};

std::string dialect_name(Dialect d);
Dialect dialect_from_name(const std::string& name);

bool dialect_allows_sum(Dialect d);
bool dialect_allows_prod(Dialect d);
bool dialect_allows_indexing(Dialect d);

// Dialects whose satisfiability question carries an l1 norm bound on the
// solution. Returns the bound, or nothing for unbounded dialects.
struct EtrInstance {
  Dialect dialect = Dialect::Etr;
  FormulaPtr formula;
  std::set<std::string> declared_vars;  // may be empty; vi dialects leave it implicit
  // Optional finite candidate sets for the brute-force decision backend.
  std::map<std::string, std::vector<Rational>> candidates;
};

// l1 bound attached to the dialect tag, when any.
bool dialect_l1_bound(Dialect d, Rational* bound);

enum class Quant { Exists, Forall };

struct QbfInstance {
  std::vector<std::pair<Quant, std::string>> prefix;
  FormulaPtr matrix;  // propositional atoms encoded as (eq (var x) (const 1))
};

using Assignment = std::map<std::string, Rational>;

// Canonical flat name of an expanded indexed variable: base "[" bits "]".
std::string canonical_indexed_name(const std::string& base, const std::vector<int>& bits);

// Replaces every occurrence of `binder` (including inside index positions of
// indexed variables) by the constant `value`. Substituting an unused binder is
// the identity.
TermPtr substitute(const TermPtr& t, const std::string& binder, long value);
FormulaPtr substitute(const FormulaPtr& f, const std::string& binder, long value);

// Free variables under canonical naming: binder-indexed references are
// expanded over the enclosing binders' ranges and reported as their canonical
// flat names. Throws DialectViolation if an index cannot be resolved from the
// enclosing binders.
std::set<std::string> free_vars(const TermPtr& t);
std::set<std::string> free_vars(const FormulaPtr& f);

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks that the formula only uses constructs permitted by the dialect tag:
// summation only in sigma dialects, products only in pi dialects, indexed
// variables only in vi dialects and only with binder-resolvable indices,
// binder domain 2, and binder names distinct along every root-to-leaf path.
ValidationReport validate_dialect(const EtrInstance& inst);

void validate_qbf(const QbfInstance& q);

// Collects names a fresh-variable generator must avoid: every variable name
// and every indexed base occurring in the formula.
std::set<std::string> collect_name_bases(const FormulaPtr& f);

// Returns `hint` if it collides with nothing in `taken` (as a name or as a
// prefix of a canonical indexed name), otherwise hint with "_" appended until
// free.
std::string fresh_name(const std::string& hint, const std::set<std::string>& taken);

}  // namespace etrforge
