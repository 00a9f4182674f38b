#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsd/generator.hpp"
#include "qsd/kernels.hpp"
#include "qsd/probability_vector.hpp"

namespace qsd {

inline constexpr double kDefaultTol = 1e-12;

// Nonnegative vector stored as exp(log_scale) * values, so that survival
// probabilities far below the double range stay usable.
struct ScaledVector {
  Vector values;
  double log_scale = 0.0;

  static ScaledVector from(Vector v);
  Vector unscaled() const;
  double log_mass() const;  // log of the l1 norm
};

enum class Side { Left, Right };

// Uniformization with a fixed kernel; reused across many time steps.
class Propagator {
 public:
  explicit Propagator(const SubMarkovGenerator& gen, double tol = kDefaultTol);

  const UniformizedKernel& kernel() const { return kernel_; }
  double tol() const { return tol_; }
  std::size_t size() const { return kernel_.size(); }

  // mu P_t (left) or P_t f (right), relative error below tol.
  ScaledVector apply(Side side, const ScaledVector& v, double t) const;
  Vector apply(Side side, std::span<const double> v, double t) const;

  // Independent vectors in parallel, deterministic ordering.
  std::vector<ScaledVector> apply_batch(Side side, const std::vector<ScaledVector>& vs, double t) const;

 private:
  UniformizedKernel kernel_;
  double tol_;
};

ProbabilityVector semigroup_apply(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                                  double tol = kDefaultTol);

// Distribution conditioned on non-extinction, mu A_t.
ProbabilityVector dcne(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                       double tol = kDefaultTol);

double survival_probability(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                            double tol = kDefaultTol);
double log_survival_probability(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                                double tol = kDefaultTol);

// x -> P_x(t < ext) for every start at once.
Vector survival_function(const SubMarkovGenerator& gen, double t, double tol = kDefaultTol);

// e^{lambda0 t} P_x(t < ext).
double survival_capacity_t(const SubMarkovGenerator& gen, std::size_t x, double t, double lambda0,
                           double tol = kDefaultTol);

// Log-survival curves t -> log P_x(t < ext) on an increasing grid, all x at once.
// Row g of the result holds the values at grid[g].
std::vector<Vector> log_survival_curves(const Propagator& prop, std::span<const double> grid);

void check_time(double t);

}  // namespace qsd
