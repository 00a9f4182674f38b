#include "qsd/profile.hpp"

#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

ConvergenceProfile convergence_profile(const SubMarkovGenerator& gen, const EigenPair& ep,
                                       const std::vector<ProbabilityVector>& mus, std::span<const double> t_grid,
                                       double tol) {
  for (const auto& mu : mus)
    if (mu.size() != gen.size()) throw DimensionMismatch("measure length differs from state count");
  Propagator prop(gen, tol);
  ConvergenceProfile out;
  out.n_mu = mus.size();
  out.n_t = t_grid.size();
  out.rows.resize(mus.size() * t_grid.size());
  const std::ptrdiff_t n_mu = static_cast<std::ptrdiff_t>(mus.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t m = 0; m < n_mu; ++m) {
    const auto& mu = mus[m];
    double eta_mu = dot(mu.span(), ep.eta);
    ScaledVector v = ScaledVector::from(mu.weights());
    double t_prev = 0.0;
    for (std::size_t g = 0; g < t_grid.size(); ++g) {
      v = prop.apply(Side::Left, v, t_grid[g] - t_prev);
      t_prev = t_grid[g];
      double s = sum(v.values);
      Vector a(v.values);
      for (auto& x : a) x /= s;
      double log_mass = std::log(s) + v.log_scale;
      double eta_t = std::exp(log_mass + ep.lambda0 * t_grid[g]);
      out.rows[m * t_grid.size() + g] = {static_cast<std::size_t>(m), t_grid[g], tv_distance(a, ep.alpha.span()),
                                         std::abs(eta_t - eta_mu)};
      v.values = std::move(a);
      v.log_scale = log_mass;
    }
  }
  return out;
}

namespace {

double tail_rate(const ConvergenceProfile& p, std::size_t mu_index, bool tv) {
  if (mu_index >= p.n_mu) throw InvalidArgument("profile index out of range");
  std::size_t start = p.n_t / 2;
  std::vector<double> t, y;
  for (std::size_t g = start; g < p.n_t; ++g) {
    const auto& r = p.rows[mu_index * p.n_t + g];
    t.push_back(r.t);
    y.push_back(tv ? r.tv : r.eta_dev);
  }
  return -fitted_log_slope(t, y);
}

}  // namespace

double ConvergenceProfile::tv_decay_rate(std::size_t mu_index) const { return tail_rate(*this, mu_index, true); }
double ConvergenceProfile::eta_decay_rate(std::size_t mu_index) const { return tail_rate(*this, mu_index, false); }

double fitted_log_slope(std::span<const double> t, std::span<const double> y, double floor) {
  if (t.size() != y.size()) throw DimensionMismatch("slope fit: sizes differ");
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > floor)) continue;
    double ly = std::log(y[i]);
    n += 1;
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  if (n < 2) return std::nan("");
  double den = n * stt - st * st;
  if (den == 0.0) return std::nan("");
  return (n * sty - st * sy) / den;
}

std::vector<double> linear_grid(double t0, double t1, std::size_t n) {
  if (n < 2) return {t0};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> log_grid(double t0, double t1, std::size_t per_decade) {
  if (!(t0 > 0.0) || !(t1 >= t0)) throw InvalidArgument("log grid needs 0 < t0 <= t1");
  double decades = std::log10(t1 / t0);
  std::size_t n = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(per_decade))) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = n == 1 ? t0 : t0 * std::pow(t1 / t0, static_cast<double>(i) / static_cast<double>(n - 1));
  g.back() = t1;
  return g;
}

}  // namespace qsd
