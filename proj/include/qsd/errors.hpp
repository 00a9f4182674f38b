#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define QSD_DEFINE_ERROR(Name) \
  class Name : public Error {  \
   public:                     \
    using Error::Error;        \
  };

QSD_DEFINE_ERROR(InvalidArgument)
QSD_DEFINE_ERROR(DimensionMismatch)
QSD_DEFINE_ERROR(ExtinctMass)
QSD_DEFINE_ERROR(NotIrreducible)
QSD_DEFINE_ERROR(NoConvergence)
QSD_DEFINE_ERROR(EmptyDomain)
QSD_DEFINE_ERROR(SingularSystem)
QSD_DEFINE_ERROR(HorizonTooShort)
QSD_DEFINE_ERROR(AssumptionViolated)
QSD_DEFINE_ERROR(AllExtinct)
QSD_DEFINE_ERROR(ConfigError)

#undef QSD_DEFINE_ERROR

class InductionBroken : public Error {
 public:
  InductionBroken(const std::string& what, std::size_t step) : Error(what), step(step) {}
  std::size_t step;
};

class DominationViolated : public Error {
 public:
  DominationViolated(const std::string& what, std::size_t state) : Error(what), state(state) {}
  std::size_t state;
};

}  // namespace qsd
