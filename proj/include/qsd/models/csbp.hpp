#pragma once

namespace qsd {

// Laplace exponent of dZ = r Z dt + sigma sqrt(Z) dB:
// du/dt = r u - (sigma^2 / 2) u^2, u(0) = lambda.
double csbp_laplace(double r_plus, double sigma, double t, double lambda);

struct CsbpLimit {
  double u_inf;      // extrapolated lim_{lambda -> inf} u(t, lambda)
  double u_hi;       // u(t, 1e8)
  double u_lo;       // u(t, 1e7)
  double richardson; // |u_inf - u_hi|
};

CsbpLimit csbp_u_inf(double r_plus, double sigma, double t);

// P_{z0}(ext <= t) = exp(-z0 u_inf(t)).
double csbp_extinction(double z0, double r_plus, double sigma, double t);

}  // namespace qsd
