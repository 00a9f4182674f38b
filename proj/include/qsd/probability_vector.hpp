#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qsd {

using Vector = std::vector<double>;

// Nonnegative measure on a finite state set with total mass at most one.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(Vector weights, double tol = 1e-9);

  static ProbabilityVector delta(std::size_t n, std::size_t i);
  static ProbabilityVector uniform(std::size_t n);
  static ProbabilityVector zero(std::size_t n);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const Vector& weights() const { return w_; }
  std::span<const double> span() const { return w_; }

  double mass() const;
  bool is_strict(double tol = 1e-9) const;
  double mass_on(std::span<const std::size_t> states) const;

  // Divides by the mass; throws ExtinctMass below 1e-300.
  ProbabilityVector normalized() const;

 private:
  Vector w_;
};

// Total variation distance, half the l1 norm of the difference.
double tv_distance(const ProbabilityVector& mu, const ProbabilityVector& nu);
double tv_distance(std::span<const double> mu, std::span<const double> nu);

double l1_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

}  // namespace qsd
