#include "qsd/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void check_time(double t) {
  if (!std::isfinite(t)) throw InvalidArgument("time must be finite");
  if (t < 0.0) throw InvalidArgument("time must be nonnegative");
}

ScaledVector ScaledVector::from(Vector v) { return ScaledVector{std::move(v), 0.0}; }

Vector ScaledVector::unscaled() const {
  Vector out(values);
  double f = std::exp(log_scale);
  for (auto& x : out) x *= f;
  return out;
}

double ScaledVector::log_mass() const {
  double s = 0.0;
  for (double x : values) s += std::abs(x);
  return s > 0.0 ? std::log(s) + log_scale : -std::numeric_limits<double>::infinity();
}

Propagator::Propagator(const SubMarkovGenerator& gen, double tol) : kernel_(gen), tol_(tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
}

ScaledVector Propagator::apply(Side side, const ScaledVector& v, double t) const {
  check_time(t);
  if (v.values.size() != size()) throw DimensionMismatch("vector length differs from state count");
  if (t == 0.0) return v;
  PoissonWindow pw = poisson_window(kernel_.rate() * t, tol_);

  Vector cur(v.values), next(size());
  double cur_log = v.log_scale;
  double m0 = max_abs(cur);
  if (m0 == 0.0) return ScaledVector{Vector(size(), 0.0), 0.0};
  for (auto& x : cur) x /= m0;
  cur_log += std::log(m0);

  // Terms left of the window are kept: when K loses mass quickly they can
  // dominate the sum even though their Poisson weight is tiny. The
  // accumulator is rescaled only when a term would exceed it by e^300.
  Vector acc(cur);
  double acc_log = pw.log_weight(0) + cur_log;
  const std::size_t last = pw.right();
  const bool left = side == Side::Left;
  for (std::size_t k = 1; k <= last; ++k) {
    double term_log = pw.log_weight(k) + cur_log;
    if (term_log > acc_log + 300.0) {
      double shrink = std::exp(acc_log - term_log);
      for (auto& x : acc) x *= shrink;
      acc_log = term_log;
    }
    double m = kernel_.step_accumulate(left, cur, next, acc, std::exp(term_log - acc_log));
    std::swap(cur, next);
    if (m == 0.0) break;
    if (m < 1e-100) {
      for (auto& x : cur) x /= m;
      cur_log += std::log(m);
    }
  }
  if (!std::isfinite(acc_log)) return ScaledVector{Vector(size(), 0.0), 0.0};
  return ScaledVector{std::move(acc), acc_log};
}

Vector Propagator::apply(Side side, std::span<const double> v, double t) const {
  return apply(side, ScaledVector::from(Vector(v.begin(), v.end())), t).unscaled();
}

std::vector<ScaledVector> Propagator::apply_batch(Side side, const std::vector<ScaledVector>& vs, double t) const {
  std::vector<ScaledVector> out(vs.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(vs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = apply(side, vs[i], t);
  return out;
}

ProbabilityVector semigroup_apply(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t, double tol) {
  if (mu.size() != gen.size()) throw DimensionMismatch("measure length differs from state count");
  Propagator prop(gen, tol);
  Vector out = prop.apply(Side::Left, mu.span(), t);
  for (auto& x : out) x = std::max(x, 0.0);
  return ProbabilityVector(std::move(out), 1e-9);
}

ProbabilityVector dcne(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t, double tol) {
  if (mu.size() != gen.size()) throw DimensionMismatch("measure length differs from state count");
  Propagator prop(gen, tol);
  ScaledVector r = prop.apply(Side::Left, ScaledVector::from(mu.weights()), t);
  double s = sum(r.values);
  if (!(s > 1e-300) || !std::isfinite(s)) throw ExtinctMass("conditioned law undefined: no surviving mass");
  Vector w(r.values);
  for (auto& x : w) x = std::max(x / s, 0.0);
  return ProbabilityVector(std::move(w), 1e-9);
}

double log_survival_probability(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t, double tol) {
  if (mu.size() != gen.size()) throw DimensionMismatch("measure length differs from state count");
  Propagator prop(gen, tol);
  return prop.apply(Side::Left, ScaledVector::from(mu.weights()), t).log_mass();
}

double survival_probability(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t, double tol) {
  return std::exp(log_survival_probability(gen, mu, t, tol));
}

Vector survival_function(const SubMarkovGenerator& gen, double t, double tol) {
  Propagator prop(gen, tol);
  return prop.apply(Side::Right, Vector(gen.size(), 1.0), t);
}

double survival_capacity_t(const SubMarkovGenerator& gen, std::size_t x, double t, double lambda0, double tol) {
  if (x >= gen.size()) throw DimensionMismatch("state out of range");
  Propagator prop(gen, tol);
  Vector e(gen.size(), 0.0);
  e[x] = 1.0;
  ScaledVector r = prop.apply(Side::Left, ScaledVector::from(std::move(e)), t);
  return std::exp(r.log_mass() + lambda0 * t);
}

std::vector<Vector> log_survival_curves(const Propagator& prop, std::span<const double> grid) {
  std::vector<Vector> out;
  out.reserve(grid.size());
  ScaledVector f = ScaledVector::from(Vector(prop.size(), 1.0));
  double t_prev = 0.0;
  for (double t : grid) {
    if (t < t_prev) throw InvalidArgument("time grid must be increasing");
    f = prop.apply(Side::Right, f, t - t_prev);
    t_prev = t;
    Vector row(prop.size());
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = f.values[i] > 0.0 ? std::log(f.values[i]) + f.log_scale : -std::numeric_limits<double>::infinity();
    out.push_back(std::move(row));
    // Keep the representation centred to avoid drift of the stored magnitudes.
    double m = max_abs(f.values);
    if (m > 0.0) {
      for (auto& x : f.values) x /= m;
      f.log_scale += std::log(m);
    }
  }
  return out;
}

}  // namespace qsd
