#include "qsd/coupling_constants.hpp"

#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

double CouplingConstants::zeta() const { return -std::log1p(-c_bar()) / t_db; }

double CouplingConstants::prefactor() const { return 2.0 * std::exp(zeta() * (t_ps + t_db + t_xt)); }

void CouplingConstants::validate() const {
  if (!(t_db > 0.0) || !(t_ps > 0.0)) throw InvalidArgument("coupling times must be positive");
  if (!(t_xt >= 0.0)) throw InvalidArgument("t_xt must be nonnegative");
  if (!(c_db > 0.0) || !(c_ps > 0.0)) throw InvalidArgument("coupling constants must be positive");
  double cb = c_bar();
  if (!(cb > 0.0 && cb < 1.0)) throw InvalidArgument("c_bar = c_db / c_ps must lie in (0, 1)");
}

}  // namespace qsd
