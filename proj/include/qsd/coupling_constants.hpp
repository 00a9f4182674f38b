#pragma once

#include <cstddef>

#include "qsd/probability_vector.hpp"

namespace qsd {

struct CouplingConstants {
  double t_db = 0.0;
  double c_db = 0.0;
  double t_ps = 0.0;
  double c_ps = 0.0;
  double t_xt = 0.0;
  ProbabilityVector alpha_c;
  std::size_t n_rn = 0;  // exhaustion index of D_rn
  double xi_rn = 1.0;

  double c_bar() const { return c_db / c_ps; }
  // zeta = -ln(1 - c_bar) / t_db
  double zeta() const;
  // C(n, xi) = 2 exp[zeta (t_ps + t_db + t_xt)]
  double prefactor() const;

  void validate() const;
};

}  // namespace qsd
