#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsd/eigen.hpp"
#include "qsd/generator.hpp"
#include "qsd/semigroup.hpp"

namespace qsd {

struct ProfileRow {
  std::size_t mu_index;
  double t;
  double tv;       // |mu A_t - alpha|_TV
  double eta_dev;  // |<mu|eta_t> - <mu|eta>|
};

struct ConvergenceProfile {
  std::vector<ProfileRow> rows;  // ordered by (mu_index, t)
  std::size_t n_mu = 0;
  std::size_t n_t = 0;

  // Least-squares decay rate of log(column) over the tail half of the grid.
  double tv_decay_rate(std::size_t mu_index) const;
  double eta_decay_rate(std::size_t mu_index) const;
};

ConvergenceProfile convergence_profile(const SubMarkovGenerator& gen, const EigenPair& ep,
                                       const std::vector<ProbabilityVector>& mus, std::span<const double> t_grid,
                                       double tol = kDefaultTol);

// Least-squares slope of log(y) against t; points with y <= floor are skipped.
double fitted_log_slope(std::span<const double> t, std::span<const double> y, double floor = 0.0);

std::vector<double> linear_grid(double t0, double t1, std::size_t n);
// Log-spaced grid with the given number of points per decade, both ends included.
std::vector<double> log_grid(double t0, double t1, std::size_t per_decade = 64);

}  // namespace qsd
