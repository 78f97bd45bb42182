#pragma once

#include <string>

#include "etrforge/ast.hpp"
#include "etrforge/eso.hpp"
#include "etrforge/prob.hpp"
#include "etrforge/reductions.hpp"
#include "etrforge/succinct.hpp"
#include "etrforge/witness.hpp"

// Textual interchange formats. Files are plain text with LF line endings and
// start with the version header line "#etrforge v1". Expressions are fully
// parenthesized prefix s-expressions; rationals are "p/q" or plain integers.
// parse(print(x)) is structurally equal to x for every artifact type, and
// printing is canonical (byte-identical across runs).
namespace etrforge::textio {

inline constexpr const char* kVersionHeader = "#etrforge v1";

EtrInstance parse_etr(const std::string& text);
std::string print_etr(const EtrInstance& inst);

QbfInstance parse_qbf(const std::string& text);
std::string print_qbf(const QbfInstance& q);

Distribution parse_distribution(const std::string& text);
std::string print_distribution(const Distribution& d);

ProbSatInstance parse_prob(const std::string& text);
std::string print_prob(const ProbSatInstance& inst);

SuccCircuit parse_succ(const std::string& text);
std::string print_succ(const SuccCircuit& s);

Succ18Instance parse_succ18(const std::string& text);
std::string print_succ18(const Succ18Instance& inst);

EsoInstance parse_eso(const std::string& text);
std::string print_eso(const EsoInstance& inst);

Witness parse_witness(const std::string& text);
std::string print_witness(const Witness& w);

EmajsatInstance parse_emajsat(const std::string& text);
std::string print_emajsat(const EmajsatInstance& inst);

// Expression-level helpers (no version header), used by the file parsers and
// handy in tests.
TermPtr parse_term(const std::string& text);
std::string print_term(const TermPtr& t);
FormulaPtr parse_formula(const std::string& text);
std::string print_formula(const FormulaPtr& f);
ProbFormulaPtr parse_prob_formula(const std::string& text);
std::string print_prob_formula(const ProbFormulaPtr& f);
EsoSentence parse_eso_sentence(const std::string& text);
std::string print_eso_sentence(const EsoSentence& s);

}  // namespace etrforge::textio
