#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsd/probability_vector.hpp"

namespace qsd {

enum class AssumptionKind { Mix, Dc, eT, Sv, LJ };

std::string to_string(AssumptionKind k);
AssumptionKind assumption_kind_from_string(const std::string& s);

inline constexpr double kSafetyFactor = 1.05;

struct AssumptionCertificate {
  AssumptionKind kind = AssumptionKind::LJ;
  bool holds = false;
  std::optional<std::size_t> counterexample;  // offending state when the check fails
  std::map<std::string, double> params;       // witnesses, raw and padded constants
  std::optional<ProbabilityVector> alpha_c;
  std::vector<double> t_grid;                 // grid used for suprema over time
  std::string note;

  double param(const std::string& name) const;
  bool has(const std::string& name) const { return params.count(name) > 0; }
};

}  // namespace qsd
