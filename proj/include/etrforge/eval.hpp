#pragma once

#include "etrforge/ast.hpp"
#include "etrforge/eso.hpp"
#include "etrforge/prob.hpp"
#include "etrforge/witness.hpp"

namespace etrforge {

// Default work budget for binder expansion: number of term-node evaluations
// actually performed (memoized re-evaluations are free).
inline constexpr long kDefaultCap = 1L << 20;

// Exact term value under the assignment. Sum/Prod binders are evaluated by
// recursive substitution over the binder domain, with subterm values memoized
// on (node, valuation of the binders the node depends on).
Rational eval_term(const TermPtr& t, const Assignment& a, long cap = kDefaultCap);

bool eval_formula(const FormulaPtr& f, const Assignment& a, long cap = kDefaultCap);

// Brute-force QBF truth over all Boolean assignments; at most 24 quantifiers.
bool eval_qbf(const QbfInstance& q);

Rational eval_prob_term(const ProbTermPtr& t, const Distribution& m, long cap = kDefaultCap);

bool eval_prob_formula(const ProbFormulaPtr& f, const Distribution& m, long cap = kDefaultCap);

// Truth of the sentence with existsf-bound symbols interpreted by the witness
// tables and first-order quantifiers brute-forced over the domain.
bool eval_eso(const EsoSentence& s, const FiniteStructure& structure, const EsoTables& w,
              long cap = kDefaultCap);

}  // namespace etrforge
