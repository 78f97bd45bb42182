#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "etrforge/ast.hpp"
#include "etrforge/rational.hpp"

namespace etrforge {

enum class EsoTermKind { Const, App, Add, Sub, Mul, Sum };

struct EsoTerm;
using EsoTermPtr = std::shared_ptr<const EsoTerm>;

// Real-valued term over a finite structure: rational constants, applications
// of function symbols to first-order variables, +, -, x, and summation of the
// body over the whole domain.
struct EsoTerm {
  EsoTermKind kind;
  Rational value;                 // Const
  std::string fn;                 // App
  std::vector<std::string> args;  // App: first-order variable names
  EsoTermPtr a, b;                // Sum uses a only
  std::string binder;             // Sum
};

EsoTermPtr s_const(const Rational& v);
EsoTermPtr s_app(const std::string& fn, std::vector<std::string> args);
EsoTermPtr s_add(EsoTermPtr a, EsoTermPtr b);
EsoTermPtr s_sub(EsoTermPtr a, EsoTermPtr b);
EsoTermPtr s_mul(EsoTermPtr a, EsoTermPtr b);
EsoTermPtr s_sum(const std::string& binder, EsoTermPtr body);

bool eso_term_equal(const EsoTermPtr& a, const EsoTermPtr& b);

enum class EsoFormulaKind { VarEq, Rel, Cmp, And, Or, Exists, Forall, ExistsF };

struct EsoFormula;
using EsoFormulaPtr = std::shared_ptr<const EsoFormula>;

// ESO sentence body. Negation is only available on atoms (variable equality,
// relation atoms, and real comparisons); the loose fragment additionally
// forbids negated comparisons, which sentence constructions here never emit.
struct EsoFormula {
  EsoFormulaKind kind;
  bool negated = false;           // VarEq/Rel/Cmp atoms
  std::string x, y;               // VarEq
  std::string rel;                // Rel
  std::vector<std::string> args;  // Rel
  CmpOp op = CmpOp::Eq;           // Cmp
  EsoTermPtr lhs, rhs;            // Cmp
  EsoFormulaPtr f, g;             // And/Or use both; quantifiers use f only
  std::string var;                // Exists/Forall: variable; ExistsF: function symbol
  int arity = 0;                  // ExistsF
};

using EsoSentence = EsoFormulaPtr;

EsoFormulaPtr q_vareq(const std::string& x, const std::string& y, bool negated = false);
EsoFormulaPtr q_rel(const std::string& rel, std::vector<std::string> args, bool negated = false);
EsoFormulaPtr q_cmp(CmpOp op, EsoTermPtr lhs, EsoTermPtr rhs, bool negated = false);
EsoFormulaPtr q_and(EsoFormulaPtr f, EsoFormulaPtr g);
EsoFormulaPtr q_or(EsoFormulaPtr f, EsoFormulaPtr g);
EsoFormulaPtr q_and_all(const std::vector<EsoFormulaPtr>& fs);
EsoFormulaPtr q_exists(const std::string& var, EsoFormulaPtr f);
EsoFormulaPtr q_forall(const std::string& var, EsoFormulaPtr f);
EsoFormulaPtr q_existsf(const std::string& fn, int arity, EsoFormulaPtr f);

bool eso_formula_equal(const EsoFormulaPtr& a, const EsoFormulaPtr& b);

struct RelationTable {
  int arity = 0;
  std::set<std::vector<int>> tuples;  // positions into the domain
};

struct FunctionTable {
  int arity = 0;
  std::map<std::vector<int>, Rational> values;  // total over domain^arity
};

// Finite first-order structure with real-valued function tables.
struct FiniteStructure {
  std::vector<std::string> domain;  // atom names; positions are the semantics-level values
  std::map<std::string, RelationTable> relations;
  std::map<std::string, FunctionTable> functions;

  int atom_position(const std::string& name) const;  // -1 when absent
};

// Tables are total over domain^arity. Throws IllFormed.
void validate_structure(const FiniteStructure& s);

struct EsoInstance {
  FiniteStructure structure;
  EsoSentence sentence;
};

// Function symbols bound by an existsf quantifier anywhere in the sentence,
// with their declared arities.
std::map<std::string, int> existsf_symbols(const EsoSentence& s);

}  // namespace etrforge
