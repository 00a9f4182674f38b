#include "qsd/probability_vector.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

ProbabilityVector::ProbabilityVector(Vector weights, double tol) : w_(std::move(weights)) {
  double m = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    double v = w_[i];
    if (!std::isfinite(v)) throw InvalidArgument("nonfinite weight at state " + std::to_string(i));
    if (v < 0.0) {
      if (v < -tol) throw InvalidArgument("negative weight at state " + std::to_string(i));
      w_[i] = 0.0;
    }
    m += w_[i];
  }
  if (m > 1.0 + tol) throw InvalidArgument("mass exceeds one: " + std::to_string(m));
}

ProbabilityVector ProbabilityVector::delta(std::size_t n, std::size_t i) {
  if (i >= n) throw DimensionMismatch("delta index out of range");
  Vector w(n, 0.0);
  w[i] = 1.0;
  return ProbabilityVector(std::move(w));
}

ProbabilityVector ProbabilityVector::uniform(std::size_t n) {
  if (n == 0) throw InvalidArgument("empty state set");
  return ProbabilityVector(Vector(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::zero(std::size_t n) { return ProbabilityVector(Vector(n, 0.0)); }

double ProbabilityVector::mass() const { return sum(w_); }

bool ProbabilityVector::is_strict(double tol) const { return std::abs(mass() - 1.0) <= tol; }

double ProbabilityVector::mass_on(std::span<const std::size_t> states) const {
  double m = 0.0;
  for (auto s : states) m += w_.at(s);
  return m;
}

ProbabilityVector ProbabilityVector::normalized() const {
  double m = mass();
  if (!(m > 1e-300)) throw ExtinctMass("cannot normalize a measure of mass " + std::to_string(m));
  Vector w(w_);
  for (auto& v : w) v /= m;
  return ProbabilityVector(std::move(w));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("l1_distance: sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double tv_distance(std::span<const double> mu, std::span<const double> nu) { return 0.5 * l1_distance(mu, nu); }

double tv_distance(const ProbabilityVector& mu, const ProbabilityVector& nu) {
  return tv_distance(mu.span(), nu.span());
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

}  // namespace qsd
