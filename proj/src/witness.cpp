#include "etrforge/witness.hpp"

namespace etrforge {

std::string witness_kind_name(WitnessKind k) {
  switch (k) {
    case WitnessKind::AssignmentW: return "assignment";
    case WitnessKind::DistributionW: return "distribution";
    case WitnessKind::EsoTablesW: return "eso-tables";
  }
  return "?";
}

Witness Witness::of(Assignment a, std::string provenance) {
  Witness w;
  w.kind = WitnessKind::AssignmentW;
  w.assignment = std::move(a);
  w.provenance = std::move(provenance);
  return w;
}

Witness Witness::of(Distribution d, std::string provenance) {
  Witness w;
  w.kind = WitnessKind::DistributionW;
  w.distribution = std::move(d);
  w.provenance = std::move(provenance);
  return w;
}

Witness Witness::of(EsoTables t, std::string provenance) {
  Witness w;
  w.kind = WitnessKind::EsoTablesW;
  w.tables = std::move(t);
  w.provenance = std::move(provenance);
  return w;
}

}  // namespace etrforge
