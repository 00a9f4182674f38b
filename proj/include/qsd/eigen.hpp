#pragma once

#include <cstddef>
#include <vector>

#include "qsd/generator.hpp"
#include "qsd/probability_vector.hpp"

namespace qsd {

// Perron triple (lambda0, alpha, eta) with <alpha|eta> = 1.
struct EigenPair {
  double lambda0 = 0.0;
  ProbabilityVector alpha;
  Vector eta;

  std::size_t iterations = 0;
  double residual_left = 0.0;   // |alpha Q + lambda0 alpha|_1
  double residual_right = 0.0;  // |Q eta + lambda0 eta|_inf
  double gap_estimate = 0.0;    // lambda1 - lambda0 from the contraction ratio; inf when unresolved
  bool degenerate_spectrum = false;
  double iteration_rate = 0.0;  // uniformization rate of the iterated kernel

  // beta = eta * alpha, the stationary law of the Q-process.
  ProbabilityVector beta() const;
};

std::vector<std::vector<std::size_t>> strongly_connected_components(const SubMarkovGenerator& gen);
bool is_irreducible(const SubMarkovGenerator& gen);

EigenPair solve_eigentriple(const SubMarkovGenerator& gen, double tol = 1e-12, std::size_t max_iter = 1000000);

// Perron rate -(spectral abscissa) of a possibly reducible generator.
double perron_rate(const SubMarkovGenerator& gen, double tol = 1e-12, std::size_t max_iter = 1000000);

}  // namespace qsd
