#pragma once

#include <functional>
#include <optional>
#include <string>

#include "etrforge/ast.hpp"
#include "etrforge/eso.hpp"
#include "etrforge/prob.hpp"
#include "etrforge/succinct.hpp"
#include "etrforge/witness.hpp"

namespace etrforge {

// Result of a reduction pass: the target instance plus witness transport in
// both directions where the underlying proof is constructive. Maps may be
// absent (closed targets) or partial (they throw on inputs outside their
// domain).
template <typename TargetT>
struct PassResult {
  TargetT target;
  std::function<Witness(const Witness&)> forward;   // source witness -> target witness
  std::function<Witness(const Witness&)> backward;  // target witness -> source witness
  std::string notes;
};

// E-MajSat: is there an assignment to the x-variables such that at least half
// of the y-assignments satisfy the matrix?
struct EmajsatInstance {
  std::vector<std::string> xvars;
  std::vector<std::string> yvars;
  FormulaPtr matrix;  // propositional formula, atoms (eq (var v) (const 1))
};

// Seven circuits {0,1}^M -> {0,1}^N indexing the variables of exponentially
// many equations x_i = 1/8, x_i + x_j = x_k and x_i * x_j = x_k.
struct Succ18Instance {
  std::vector<BoolCircuit> circuits;  // C0..C6, shared input/output widths

  int equation_width() const { return circuits.empty() ? 0 : circuits[0].input_width; }
  int variable_width() const {
    return circuits.empty() || circuits[0].outputs.empty()
               ? 0
               : static_cast<int>(circuits[0].outputs.size());
  }
};

void validate_succ18(const Succ18Instance& inst);

// --- Boolean arithmetization -------------------------------------------------

// 0/1-preserving arithmetization of a propositional formula: A(x) = x,
// A(not f) = 1 - A(f), A(f and g) = A(f) * A(g), A(f or g) =
// 1 - (1 - A(f)) * (1 - A(g)).
TermPtr arithmetize_bool(const FormulaPtr& f);

// QBF -> PiEtr: closed formula "A(q) = 1" with quantifiers turned into unary
// products. No witness maps (the target is closed).
PassResult<EtrInstance> qbf_to_pietr(const QbfInstance& q);

// E-MajSat -> SigmaEtr: Booleanity disjunctions for the x-variables plus the
// counting threshold 2^(n-1) <= sum over the y-binders of the arithmetized
// matrix.
PassResult<EtrInstance> emajsat_to_sigmaetr(const EmajsatInstance& inst);

// --- Solution bound ----------------------------------------------------------

// The bound 2^(L * d^(c*n)) kept as an exponent record so that astronomically
// large values never have to be materialized.
struct SolutionBound {
  long L = 1;
  long d = 1;
  long cn = 1;
  mpz_class exponent;  // L * d^(c*n)

  // Only sensible when the exponent is small; callers guard.
  Rational bound() const;
};

SolutionBound compute_solution_bound(const BoundParameters& b);

// --- l1-norm scaling and the probabilistic encodings -------------------------

// SigmaViEtr -> SigmaViEtr1 via the squaring chain t_{i+1} = t_i^2 over 2^m
// indexed fresh variables: every source variable is scaled by d = t_{2^m} and
// denominators are cleared per atom. The caller picks m; the proof's
// polynomial-in-S choice is astronomically infeasible and only needed
// asymptotically.
PassResult<EtrInstance> sumvi_to_sumvi1(const EtrInstance& inst, int m);

// Successor indicator A(e, f) = 1 iff the number with bits f (most significant
// first) is the successor of the number with bits e; built as a negation-free
// product over bit positions with prefix carries. Variables are the given
// binder names.
TermPtr successor_indicator(const std::vector<std::string>& ebits,
                            const std::vector<std::string>& fbits);

// SigmaViEtr1 -> probabilistic satisfiability over one ternary variable X0
// (value 2 encodes -1) and N binary index variables: each source variable
// becomes P(X0=1, index bits) - P(X0=2, index bits).
PassResult<ProbSatInstance> sumvi1_to_probsat(const EtrInstance& inst);

// --- Event arithmetization and the small-model pipeline ----------------------

// Polynomial indicator of the event over variables named after the random
// variables; exact 0/1 on Val^n. Binary domains use 1 - (x - v)^2, larger
// domains the Lagrange basis polynomial.
TermPtr arithmetize_event(const EventPtr& ev, const std::vector<std::string>& vars, int c);

// Rewrites every basic term into summations over full-tuple primitives:
// variables constrained by the event are expanded to concrete values, the
// remaining ones are bound by fresh summation dummies.
ProbFormulaPtr normalize_prob_primitives(const ProbFormulaPtr& f,
                                         const std::vector<std::string>& vars, int c);

// Small-model probabilistic satisfiability -> SigmaEtr over p mass variables
// X1..Xp and selector variables e_{i,j}; full-tuple primitives become the
// selector-array expression sum_i X_i * prod_j [f_j = e_{i,j}].
PassResult<EtrInstance> smsat_to_sigmaetr(const ProbSatInstance& inst, long p);

// SigmaEtrHalf -> small-model probabilistic satisfiability over ternary
// variables X1..Xn and E with q0 = q2 = 0 and q1 = 1/2 enforced; binders are
// simulated by 2*q_e with a correction term, and the target promises support
// <= n+2.
PassResult<ProbSatInstance> sigmaetr_half_to_smsat(const EtrInstance& inst);

// --- SigmaEtr normal forms ----------------------------------------------------

// Moves every unary sum to the outside of its polynomial, introducing fresh
// scaling variables Z_i = 1/2^i with defining equations conjoined.
PassResult<EtrInstance> prenex_sums(const EtrInstance& inst);

// True iff no Sum node occurs below any other operator within the term.
bool is_sum_prenex(const TermPtr& t);

// Negation removal on explicit formulas: output uses only = and < atoms and no
// Boolean negation (the counterpart of the succinct-circuit transformation).
FormulaPtr remove_negations_formula(const FormulaPtr& f);

// Collapses a negation-free instance (atoms = and < only) into a single
// equation "sum of squares = 0" over the source variables plus one fresh
// variable per Boolean node. Candidate annotations for the brute-force backend
// are carried over and extended to the fresh variables where the gadget values
// are enumerable.
PassResult<EtrInstance> flatten_single_poly(const EtrInstance& inst);

// --- Permanent ----------------------------------------------------------------

// Lagrange polynomial over 0..m that is 1 at x = 1 and 0 elsewhere, applied
// to the given term.
TermPtr one_indicator(const TermPtr& x, int m);

// delta(M): 1 iff the m x m matrix M (entries M<mu>_<nu>, 1-based) is a
// permutation matrix, 0 on all other 0/1 matrices.
TermPtr permutation_indicator(int m);

// Permanent of the matrix with entries x<mu>_<nu> as a nest of m^2 binary
// summation binders M<mu>_<nu> weighted by the permutation indicator.
TermPtr permanent_term(int m);

// --- ESO construction ----------------------------------------------------------

// Builds the L-ESO sentence over the binary structure: existentially
// quantified q, id, y_i, s_i and gate functions c_i_v, with range constraints,
// gate clauses, selectors, linking equations and the three equation families.
// The returned instance carries the matching binary structure (domain {0,1},
// relation One = {1}).
PassResult<EsoInstance> succ18_to_leso(const Succ18Instance& inst);

// Replaces every <= comparison by the equality a*eps + x = b*eps with fresh
// nullary function symbols quantified at the front.
EsoSentence leso_leq_rewrite(const EsoSentence& s);

// --- Integer encodings over probabilities --------------------------------------

// k as a probabilistic term of size O(log k) built from P(top) by doubling.
ProbTermPtr encode_integer(long k);

// Zero as an inconsistent probability.
ProbTermPtr encode_zero();

}  // namespace etrforge
