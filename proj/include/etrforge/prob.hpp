#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "etrforge/ast.hpp"
#include "etrforge/rational.hpp"

namespace etrforge {

// Value slot of an atomic event: a concrete value from 0..c-1, or the name of
// an enclosing summation dummy.
using EventValue = std::variant<long, std::string>;

enum class EventKind { Top, AtomEq, Not, And };

struct EventFormula;
using EventPtr = std::shared_ptr<const EventFormula>;

struct EventFormula {
  EventKind kind;
  std::string var;   // AtomEq
  EventValue value;  // AtomEq
  EventPtr f, g;     // Not uses f only; And uses both
};

EventPtr e_top();
EventPtr e_eq(const std::string& var, long value);
EventPtr e_eq_dummy(const std::string& var, const std::string& dummy);
EventPtr e_eq(const std::string& var, EventValue value);
EventPtr e_not(EventPtr f);
EventPtr e_and(EventPtr f, EventPtr g);
EventPtr e_and_all(const std::vector<EventPtr>& fs);

bool event_equal(const EventPtr& a, const EventPtr& b);

enum class ProbTermKind { Prob, Add, Neg, Mul, Sum };

struct ProbTerm;
using ProbTermPtr = std::shared_ptr<const ProbTerm>;

struct ProbTerm {
  ProbTermKind kind;
  EventPtr event;      // Prob
  ProbTermPtr a, b;    // Neg/Sum use a only
  std::string binder;  // Sum
  int domain = 0;      // Sum: dummy ranges over 0..domain-1
};

ProbTermPtr p_prob(EventPtr event);
ProbTermPtr p_add(ProbTermPtr a, ProbTermPtr b);
ProbTermPtr p_neg(ProbTermPtr a);
ProbTermPtr p_sub(ProbTermPtr a, ProbTermPtr b);
ProbTermPtr p_mul(ProbTermPtr a, ProbTermPtr b);
ProbTermPtr p_sum(const std::string& binder, int domain, ProbTermPtr body);

bool prob_term_equal(const ProbTermPtr& a, const ProbTermPtr& b);

enum class ProbFormulaKind { Atom, Not, And, Or };

struct ProbFormula;
using ProbFormulaPtr = std::shared_ptr<const ProbFormula>;

struct ProbFormula {
  ProbFormulaKind kind;
  CmpOp op = CmpOp::Eq;   // Atom
  ProbTermPtr lhs, rhs;   // Atom
  ProbFormulaPtr f, g;
};

ProbFormulaPtr pf_atom(CmpOp op, ProbTermPtr lhs, ProbTermPtr rhs);
ProbFormulaPtr pf_not(ProbFormulaPtr f);
ProbFormulaPtr pf_and(ProbFormulaPtr f, ProbFormulaPtr g);
ProbFormulaPtr pf_or(ProbFormulaPtr f, ProbFormulaPtr g);
ProbFormulaPtr pf_and_all(const std::vector<ProbFormulaPtr>& fs);

bool prob_formula_equal(const ProbFormulaPtr& a, const ProbFormulaPtr& b);

// Replaces every occurrence of the dummy `binder` in event value slots by the
// concrete value.
ProbTermPtr substitute_dummy(const ProbTermPtr& t, const std::string& binder, long value);

// Sparse joint distribution with exact rational masses. Absent tuples have
// mass zero.
struct Distribution {
  std::vector<std::string> vars;
  int domain = 2;  // all variables share the value domain 0..domain-1
  std::map<std::vector<int>, Rational> entries;
};

// Masses nonnegative, summing to exactly 1, tuples in range. Throws IllFormed.
void validate_distribution(const Distribution& d);

long support_size(const Distribution& d);
bool check_small_model(const Distribution& d, long p);

// A probabilistic satisfiability instance; small_model_p present for the
// small-model variant (support must not exceed p).
struct ProbSatInstance {
  std::vector<std::string> vars;
  int domain = 2;
  ProbFormulaPtr formula;
  std::optional<long> small_model_p;
};

}  // namespace etrforge
