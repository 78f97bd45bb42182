#pragma once

#include "etrforge/ast.hpp"
#include "etrforge/eso.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/prob.hpp"
#include "etrforge/witness.hpp"

namespace etrforge {

// Witness checking: true iff the instance is satisfied by the witness. The
// witness kind must match the instance kind. l1-bounded dialects additionally
// gate on the norm of the assignment; small-model instances on the support
// size.
bool check_witness(const EtrInstance& inst, const Witness& w, long cap = kDefaultCap);
bool check_witness(const ProbSatInstance& inst, const Witness& w, long cap = kDefaultCap);
bool check_witness(const EsoInstance& inst, const Witness& w, long cap = kDefaultCap);

// Sum of absolute values over the assignment's entries.
Rational l1_norm(const Assignment& a);

// Syntactic detection of finite candidate sets: explicit annotations, the
// Booleanity disjunction (x = 0 or x = 1, in either orientation) and the
// pattern x * (x - 1) = 0. Returns candidate sets for exactly the variables it
// could constrain.
std::map<std::string, std::vector<Rational>> detect_candidates(const EtrInstance& inst);

// Exists-decision by exhaustive enumeration of candidate tuples with exact
// evaluation. Every free variable must be finite-constrained; the search space
// must stay within 2^20 tuples.
bool brute_force_decide(const EtrInstance& inst, long cap = kDefaultCap);

}  // namespace etrforge
