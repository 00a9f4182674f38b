#include "qsd/certificate.hpp"

#include "qsd/errors.hpp"

namespace qsd {

std::string to_string(AssumptionKind k) {
  switch (k) {
    case AssumptionKind::Mix: return "Mix";
    case AssumptionKind::Dc: return "Dc";
    case AssumptionKind::eT: return "eT";
    case AssumptionKind::Sv: return "Sv";
    case AssumptionKind::LJ: return "LJ";
  }
  return "?";
}

AssumptionKind assumption_kind_from_string(const std::string& s) {
  for (auto k : {AssumptionKind::Mix, AssumptionKind::Dc, AssumptionKind::eT, AssumptionKind::Sv, AssumptionKind::LJ})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown assumption kind '" + s + "'");
}

double AssumptionCertificate::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw InvalidArgument("certificate has no parameter '" + name + "'");
  return it->second;
}

}  // namespace qsd
