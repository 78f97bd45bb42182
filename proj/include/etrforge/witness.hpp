#pragma once

#include <map>
#include <string>

#include "etrforge/ast.hpp"
#include "etrforge/eso.hpp"
#include "etrforge/prob.hpp"

namespace etrforge {

// Guessed function tables for the existsf-bound symbols of an ESO sentence,
// keyed by domain atom names.
struct EsoTables {
  struct Table {
    int arity = 0;
    std::map<std::vector<std::string>, Rational> entries;
  };
  std::map<std::string, Table> tables;
};

enum class WitnessKind { AssignmentW, DistributionW, EsoTablesW };

std::string witness_kind_name(WitnessKind k);

// A candidate solution plus transport metadata. Exactly the payload matching
// `kind` is meaningful.
struct Witness {
  WitnessKind kind = WitnessKind::AssignmentW;
  Assignment assignment;
  Distribution distribution;
  EsoTables tables;
  std::string provenance;  // which pass produced it, free-form

  static Witness of(Assignment a, std::string provenance = "");
  static Witness of(Distribution d, std::string provenance = "");
  static Witness of(EsoTables t, std::string provenance = "");
};

// Parameters of the solution-distance bound 2^(L * d^(c*n)). The absolute
// constant c is unspecified by the underlying theorem; it defaults to 1 here
// and is a configuration value only, not a sound choice for real bounds.
struct BoundParameters {
  long L = 1;  // coefficient bit size
  long d = 1;  // total degree
  long n = 1;  // variable count
  long c = 1;  // absolute constant (configurable)
};

}  // namespace etrforge
