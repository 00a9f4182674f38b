#include "qsd/models/csbp.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

namespace odeint = boost::numeric::odeint;

double csbp_laplace(double r_plus, double sigma, double t, double lambda) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(t >= 0.0)) throw InvalidArgument("t must be nonnegative");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  if (t == 0.0 || lambda == 0.0) return lambda;
  using State = std::array<double, 1>;
  const double half = 0.5 * sigma * sigma;
  auto rhs = [&](const State& u, State& du, double) { du[0] = r_plus * u[0] - half * u[0] * u[0]; };
  State u{lambda};
  // The initial decay rate is of order sigma^2 lambda / 2.
  double dt0 = std::min(t, 1e-3 / (1.0 + half * lambda + std::abs(r_plus)));
  auto stepper = odeint::make_controlled(1e-13, 1e-12, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_adaptive(stepper, rhs, u, 0.0, t, dt0);
  } catch (const std::exception& e) {
    throw NoConvergence(std::string("Riccati integration failed: ") + e.what());
  }
  if (!std::isfinite(u[0])) throw NoConvergence("Riccati integration produced a nonfinite value");
  return u[0];
}

CsbpLimit csbp_u_inf(double r_plus, double sigma, double t) {
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  CsbpLimit out;
  out.u_hi = csbp_laplace(r_plus, sigma, t, 1e8);
  out.u_lo = csbp_laplace(r_plus, sigma, t, 1e7);
  out.u_inf = (10.0 * out.u_hi - out.u_lo) / 9.0;
  out.richardson = std::abs(out.u_inf - out.u_hi);
  return out;
}

double csbp_extinction(double z0, double r_plus, double sigma, double t) {
  if (!(z0 >= 0.0)) throw InvalidArgument("z0 must be nonnegative");
  return std::exp(-z0 * csbp_u_inf(r_plus, sigma, t).u_inf);
}

}  // namespace qsd
