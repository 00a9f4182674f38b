#include "qsd/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kClampTol = 1e-12;

}  // namespace

std::size_t horizon_steps(double t_h, const CouplingConstants& consts) {
  if (!(t_h > consts.t_ps)) throw HorizonTooShort("horizon must exceed t_ps");
  // Guard the floor against round-off when t_h - t_ps is a multiple of t_db.
  double q = (t_h - consts.t_ps) / consts.t_db;
  return static_cast<std::size_t>(std::floor(q + 1e-12));
}

CouplingEngine::CouplingEngine(const SubMarkovGenerator& gen, CouplingConstants consts, double tol)
    : gen_(&gen), k_(std::move(consts)), prop_(gen, tol) {
  k_.validate();
  if (k_.alpha_c.size() != gen.size()) throw DimensionMismatch("alpha_c length differs from state count");
}

std::size_t CouplingEngine::horizon_steps(double t_h) const { return qsd::horizon_steps(t_h, k_); }

double CouplingEngine::log_survival(const Vector& mu, double t) const {
  return prop_.apply(Side::Left, ScaledVector::from(mu), t).log_mass();
}

ProbabilityVector CouplingEngine::conditioned(const Vector& mu, double t) const {
  ScaledVector v = prop_.apply(Side::Left, ScaledVector::from(mu), t);
  double s = sum(v.values);
  if (!(s > 0.0)) throw ExtinctMass("no surviving mass");
  Vector w(v.values);
  for (auto& x : w) x = std::max(x / s, 0.0);
  return ProbabilityVector(std::move(w), 1e-9);
}

double CouplingEngine::coupling_mass(const ProbabilityVector& mu, std::size_t k, double t, double t_h) const {
  std::size_t J = horizon_steps(t_h);
  double kt = static_cast<double>(k) * k_.t_db;
  if (k == 0 || k > J || kt > t * (1.0 + 1e-14)) return 0.0;
  double cb = k_.c_bar();
  double lm = log_survival(mu.weights(), t_h) - log_survival(mu.weights(), t);
  const Vector& ac = k_.alpha_c.weights();
  double la = log_survival(ac, std::max(t - kt, 0.0)) - log_survival(ac, t_h - kt);
  return cb * std::pow(1.0 - cb, static_cast<double>(k - 1)) * std::exp(lm + la);
}

CouplingState CouplingEngine::start(const ProbabilityVector& mu, double t_h) const {
  if (mu.size() != gen_->size()) throw DimensionMismatch("measure length differs from state count");
  CouplingState s;
  s.j = 0;
  s.r = 1.0;
  s.nu = mu.normalized();
  s.t_h = t_h;
  s.J = horizon_steps(t_h);
  return s;
}

CouplingState CouplingEngine::advance(const CouplingState& s, const ProbabilityVector& mu) const {
  if (s.j >= s.J) throw InvalidArgument("coupling already reached the horizon");
  const double tdb = k_.t_db;
  const double jt = static_cast<double>(s.j) * tdb;
  const Vector& ac = k_.alpha_c.weights();
  ScaledVector nu_p = prop_.apply(Side::Left, ScaledVector::from(s.nu.weights()), tdb);
  double log_pnu_db = nu_p.log_mass();
  double log_pnu_rest = log_survival(s.nu.weights(), s.t_h - jt);
  double log_pac = log_survival(ac, s.t_h - jt - tdb);
  double c = k_.c_bar() * std::exp(log_pnu_rest - log_pnu_db - log_pac);
  if (!(c > 0.0) || c > k_.c_db * (1.0 + 1e-12))
    throw InductionBroken("c_j = " + std::to_string(c) + " outside (0, c_db = " + std::to_string(k_.c_db) +
                              "] at step " + std::to_string(s.j),
                          s.j);

  CouplingState n = s;
  n.j = s.j + 1;
  n.c_last = c;
  double mass = sum(nu_p.values);
  Vector next(ac.size());
  double min_entry = 0.0;
  std::size_t at = 0;
  for (std::size_t x = 0; x < ac.size(); ++x) {
    double v = (nu_p.values[x] / mass - c * ac[x]) / (1.0 - c);
    if (v < min_entry) {
      min_entry = v;
      at = x;
    }
    next[x] = v;
  }
  if (min_entry < -kClampTol)
    throw InductionBroken("nu_" + std::to_string(n.j) + " has a negative entry " + std::to_string(min_entry) +
                              " at state " + std::to_string(at),
                          s.j);
  for (auto& v : next)
    if (v < 0.0) {
      v = 0.0;
      ++n.clamped;
    }
  double total = sum(next);
  for (auto& v : next) v /= total;
  n.nu = ProbabilityVector(std::move(next));

  double log_l = std::log(s.r) + log_survival(mu.weights(), jt) - log_survival(mu.weights(), jt + tdb) + log_pnu_db;
  n.r = std::exp(log_l) * (1.0 - c);
  n.a.clear();
  for (std::size_t k = 1; k <= n.j; ++k) n.a.push_back(coupling_mass(mu, k, static_cast<double>(n.j) * tdb, s.t_h));
  return n;
}

double CouplingEngine::residual_identity(const CouplingState& s, const ProbabilityVector& mu) const {
  double jt = static_cast<double>(s.j) * k_.t_db;
  double rhs = std::pow(1.0 - k_.c_bar(), static_cast<double>(s.j)) *
               std::exp(log_survival(mu.weights(), s.t_h) - log_survival(mu.weights(), jt) -
                        log_survival(s.nu.weights(), s.t_h - jt));
  return std::abs(s.r - rhs);
}

double CouplingEngine::reconstruction_deviation(const CouplingState& s, const ProbabilityVector& mu) const {
  double jt = static_cast<double>(s.j) * k_.t_db;
  ProbabilityVector lhs = s.j == 0 ? mu.normalized() : conditioned(mu.weights(), jt);
  Vector rhs(mu.size(), 0.0);
  for (std::size_t k = 1; k <= s.j; ++k) {
    double w = s.a[k - 1];
    if (w == 0.0) continue;
    auto ak = conditioned(k_.alpha_c.weights(), static_cast<double>(s.j - k) * k_.t_db);
    for (std::size_t x = 0; x < rhs.size(); ++x) rhs[x] += w * ak[x];
  }
  for (std::size_t x = 0; x < rhs.size(); ++x) rhs[x] += s.r * s.nu[x];
  return l1_distance(lhs.span(), rhs);
}

ProbabilityVector CouplingEngine::minorizing_measure(double t_h) const {
  std::size_t J = horizon_steps(t_h);
  Vector out(gen_->size(), 0.0);
  double cb = k_.c_bar();
  for (std::size_t k = 1; k <= J; ++k) {
    double w = cb * std::pow(1.0 - cb, static_cast<double>(k - 1));
    auto ak = conditioned(k_.alpha_c.weights(), t_h - static_cast<double>(k) * k_.t_db);
    for (std::size_t x = 0; x < out.size(); ++x) out[x] += w * ak[x];
  }
  return ProbabilityVector(std::move(out));
}

CouplingRun CouplingEngine::run(const ProbabilityVector& mu, double t_h) const {
  CouplingRun out;
  CouplingState s = start(mu, t_h);
  auto record = [&](const CouplingState& st, double c_next) {
    double msum = st.r;
    for (double a : st.a) msum += a;
    double mn = *std::min_element(st.nu.weights().begin(), st.nu.weights().end());
    out.trace.push_back({st.j, st.r, c_next, mn, reconstruction_deviation(st, mu), residual_identity(st, mu),
                         std::abs(msum - 1.0)});
  };
  try {
    while (s.j < s.J) {
      CouplingState n = advance(s, mu);
      record(s, n.c_last);
      s = std::move(n);
    }
    record(s, std::numeric_limits<double>::quiet_NaN());
    out.completed = true;
  } catch (const InductionBroken& e) {
    out.failure = e.what();
    record(s, std::numeric_limits<double>::quiet_NaN());
  }
  out.final_state = s;
  auto lhs = conditioned(mu.weights(), t_h);
  auto rhs = minorizing_measure(t_h);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < lhs.size(); ++x) slack = std::min(slack, lhs[x] - rhs[x]);
  out.domination_slack = slack;
  return out;
}

std::vector<LowerBoundCheck> CouplingEngine::verify_lower_bound(
    const std::vector<ProbabilityVector>& mus, const std::vector<std::pair<double, double>>& t_pairs) const {
  std::vector<LowerBoundCheck> out;
  double cb = k_.c_bar();
  for (std::size_t i = 0; i < mus.size(); ++i) {
    for (auto [t1, t2] : t_pairs) {
      if (t2 < t1) throw InvalidArgument("pairs must satisfy t1 <= t2");
      LowerBoundCheck c{i, t1, t2, 0.0, 0.0, 2.0, k_.prefactor() * std::exp(-k_.zeta() * t1), true};
      auto a2 = conditioned(mus[i].weights(), t2);
      auto a1 = conditioned(mus[i].weights(), t1);
      c.tv = tv_distance(a1, a2);
      double th = t1 - k_.t_xt;
      if (th > k_.t_ps) {
        std::size_t J = horizon_steps(th);
        c.tv_bound = 2.0 * std::pow(1.0 - cb, static_cast<double>(J));
        auto m = minorizing_measure(th);
        double slack = std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < m.size(); ++x) slack = std::min(slack, a2[x] - m[x]);
        c.slack = slack;
      }
      c.ok = c.slack >= -kClampTol && c.tv <= c.tv_bound + kIdentityTol && c.tv_bound <= c.exp_bound * (1 + 1e-12);
      out.push_back(c);
    }
  }
  return out;
}

double CouplingEngine::glb_slack(const ProbabilityVector& mu, double t_ev, double t_h) const {
  std::size_t J = horizon_steps(t_h);
  double eps = 1e-12 * t_h;
  if (t_ev > t_h + eps || t_ev < static_cast<double>(J) * k_.t_db - eps)
    throw InvalidArgument("t_ev must lie in [J t_db, t_h]");
  t_ev = std::min(t_ev, t_h);
  Vector f = prop_.apply(Side::Right, Vector(gen_->size(), 1.0), t_h - t_ev);
  auto lhs = prop_.apply(Side::Left, ScaledVector::from(mu.weights()), t_ev);
  double log_den = log_survival(mu.weights(), t_h);
  Vector l(mu.size());
  for (std::size_t x = 0; x < l.size(); ++x) l[x] = lhs.values[x] * std::exp(lhs.log_scale - log_den) * f[x];
  Vector r(mu.size(), 0.0);
  double cb = k_.c_bar();
  const Vector& ac = k_.alpha_c.weights();
  for (std::size_t k = 1; k <= J; ++k) {
    double kt = static_cast<double>(k) * k_.t_db;
    double w = cb * std::pow(1.0 - cb, static_cast<double>(k - 1));
    auto p = prop_.apply(Side::Left, ScaledVector::from(ac), std::max(t_ev - kt, 0.0));
    double ld = log_survival(ac, t_h - kt);
    for (std::size_t x = 0; x < r.size(); ++x) r[x] += w * p.values[x] * std::exp(p.log_scale - ld) * f[x];
  }
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < l.size(); ++x) slack = std::min(slack, l[x] - r[x]);
  return slack;
}

double coupling_mass(const SubMarkovGenerator& gen, const CouplingConstants& consts, const ProbabilityVector& mu,
                     std::size_t k, double t, double t_h) {
  return CouplingEngine(gen, consts).coupling_mass(mu, k, t, t_h);
}

CouplingState advance(const CouplingState& state, const SubMarkovGenerator& gen, const CouplingConstants& consts,
                      const ProbabilityVector& mu) {
  return CouplingEngine(gen, consts).advance(state, mu);
}

double residual_identity(const CouplingState& state, const SubMarkovGenerator& gen, const CouplingConstants& consts,
                         const ProbabilityVector& mu) {
  return CouplingEngine(gen, consts).residual_identity(state, mu);
}

ProbabilityVector minorizing_measure(const SubMarkovGenerator& gen, const CouplingConstants& consts, double t_h) {
  return CouplingEngine(gen, consts).minorizing_measure(t_h);
}

std::vector<LowerBoundCheck> verify_lower_bound(const SubMarkovGenerator& gen, const CouplingConstants& consts,
                                                const std::vector<ProbabilityVector>& mus,
                                                const std::vector<std::pair<double, double>>& t_pairs) {
  return CouplingEngine(gen, consts).verify_lower_bound(mus, t_pairs);
}

}  // namespace qsd
