#pragma once

#include <stdexcept>
#include <string>

namespace etrforge {

enum class Err {
  SyntaxError,
  DialectViolation,
  ExpansionCapExceeded,
  UnboundVariable,
  UnknownVariable,
  TooLarge,
  MalformedOpcode,
  IllFormed,
  NonPropositionalAtom,
  ValueOutOfDomain,
  ConditionalPresent,
  NotNormalized,
  UnsupportedAtom,
  WidthMismatch,
  MissingTable,
  KindMismatch,
  Undecidable,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::SyntaxError: return "SYNTAX_ERROR";
    case Err::DialectViolation: return "DIALECT_VIOLATION";
    case Err::ExpansionCapExceeded: return "EXPANSION_CAP_EXCEEDED";
    case Err::UnboundVariable: return "UNBOUND_VARIABLE";
    case Err::UnknownVariable: return "UNKNOWN_VARIABLE";
    case Err::TooLarge: return "TOO_LARGE";
    case Err::MalformedOpcode: return "MALFORMED_OPCODE";
    case Err::IllFormed: return "ILL_FORMED";
    case Err::NonPropositionalAtom: return "NON_PROPOSITIONAL_ATOM";
    case Err::ValueOutOfDomain: return "VALUE_OUT_OF_DOMAIN";
    case Err::ConditionalPresent: return "CONDITIONAL_PRESENT";
    case Err::NotNormalized: return "NOT_NORMALIZED";
    case Err::UnsupportedAtom: return "UNSUPPORTED_ATOM";
    case Err::WidthMismatch: return "WIDTH_MISMATCH";
    case Err::MissingTable: return "MISSING_TABLE";
    case Err::KindMismatch: return "KIND_MISMATCH";
    case Err::Undecidable: return "UNDECIDABLE_BY_THIS_BACKEND";
  }
  return "UNKNOWN";
}

class EtrError : public std::runtime_error {
public:
  EtrError(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

  Err code() const { return code_; }

private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw EtrError(code, msg); }

}  // namespace etrforge
