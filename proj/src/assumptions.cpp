#include "qsd/assumptions.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "qsd/errors.hpp"
#include "qsd/mc/rng.hpp"
#include "qsd/profile.hpp"

namespace qsd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> positions_in(std::span<const std::size_t> sub, std::span<const std::size_t> super) {
  std::vector<std::size_t> pos;
  for (auto x : sub) {
    auto it = std::find(super.begin(), super.end(), x);
    if (it == super.end()) throw InvalidArgument("set is not contained in its enclosure");
    pos.push_back(static_cast<std::size_t>(it - super.begin()));
  }
  return pos;
}

// log of sum_i w_i exp(l_i) for nonnegative weights.
double log_mix(std::span<const double> w, std::span<const double> l) {
  double m = -kInf;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) m = std::max(m, l[i]);
  if (!std::isfinite(m)) return -kInf;
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s += w[i] * std::exp(l[i] - m);
  return m + std::log(s);
}

struct MixEval {
  double c = 0.0;
  Vector alpha;
  std::optional<std::size_t> worst;
};

MixEval evaluate_mix(const std::vector<Vector>& rows, std::span<const std::size_t> starts,
                     const std::optional<ProbabilityVector>& alpha_c) {
  MixEval ev;
  const std::size_t n = rows.front().size();
  if (!alpha_c) {
    Vector mn(n, kInf);
    for (const auto& r : rows)
      for (std::size_t y = 0; y < n; ++y) mn[y] = std::min(mn[y], r[y]);
    double c = sum(mn);
    ev.c = c;
    if (c > 0.0) {
      ev.alpha = mn;
      for (auto& v : ev.alpha) v /= c;
    } else {
      std::size_t best = 0;
      double least = kInf;
      for (std::size_t a = 0; a < rows.size(); ++a) {
        double m = sum(rows[a]);
        if (m < least) {
          least = m;
          best = a;
        }
      }
      ev.worst = starts[best];
    }
    return ev;
  }
  ev.alpha = alpha_c->weights();
  double c = kInf;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t y = 0; y < n; ++y) {
      if (ev.alpha[y] <= 0.0) continue;
      double r = rows[a][y] / ev.alpha[y];
      if (r < c) {
        c = r;
        ev.worst = starts[a];
      }
    }
  }
  ev.c = std::isfinite(c) ? c : 0.0;
  return ev;
}

}  // namespace

std::vector<Vector> killed_kernel_rows(const SubMarkovGenerator& gen, std::span<const std::size_t> starts,
                                       std::span<const std::size_t> enclosure, double t, double tol) {
  auto killed = gen.restrict_to(enclosure);
  auto pos = positions_in(starts, enclosure);
  Propagator prop(killed, tol);
  std::vector<ScaledVector> init;
  for (auto p : pos) {
    Vector e(enclosure.size(), 0.0);
    e[p] = 1.0;
    init.push_back(ScaledVector::from(std::move(e)));
  }
  auto out = prop.apply_batch(Side::Left, init, t);
  std::vector<Vector> rows;
  for (const auto& sv : out) {
    Vector local = sv.unscaled();
    Vector full(gen.size(), 0.0);
    for (std::size_t k = 0; k < enclosure.size(); ++k) full[enclosure[k]] = std::max(local[k], 0.0);
    rows.push_back(std::move(full));
  }
  return rows;
}

AssumptionCertificate check_mix(const SubMarkovGenerator& gen, const Exhaustion& exh, std::size_t n, double t,
                                const std::optional<ProbabilityVector>& alpha_c, double tol) {
  exh.validate(gen.size());
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("check_mix needs t > 0");
  const auto& dn = exh.set(n);
  if (alpha_c && alpha_c->size() != gen.size()) throw DimensionMismatch("alpha_c length differs from state count");

  AssumptionCertificate cert;
  cert.kind = AssumptionKind::Mix;
  // Killing on exit from a larger enclosure only increases the kernel, but all
  // m > n are evaluated and the best kept; with n the last set, m = n.
  std::size_t m_first = std::min(n + 1, exh.last());
  MixEval best;
  std::size_t best_m = m_first;
  bool first = true;
  for (std::size_t m = m_first; m <= exh.last(); ++m) {
    auto rows = killed_kernel_rows(gen, dn, exh.set(m), t, tol);
    MixEval ev = evaluate_mix(rows, dn, alpha_c);
    if (first || ev.c > best.c) {
      best = ev;
      best_m = m;
      first = false;
    }
  }
  cert.params["n"] = static_cast<double>(n);
  cert.params["m"] = static_cast<double>(best_m);
  cert.params["t"] = t;
  cert.params["c_raw"] = best.c;
  cert.params["c"] = best.c / kSafetyFactor;
  cert.holds = best.c > 0.0;
  if (cert.holds) {
    cert.alpha_c = ProbabilityVector(best.alpha);
    bool ds_in_dn = true;
    for (auto x : exh.set(exh.s))
      if (!exh.contains(n, x)) ds_in_dn = false;
    cert.params["alpha_c_Ds"] = cert.alpha_c->mass_on(exh.set(exh.s));
    cert.params["alpha_c_Dn"] = cert.alpha_c->mass_on(dn);
    cert.params["Ds_in_Dn"] = ds_in_dn ? 1.0 : 0.0;
  } else {
    cert.counterexample = best.worst;
    cert.note = "no common minorant of the killed kernel rows";
  }
  cert.note = cert.holds ? (alpha_c ? "alpha_c given" : "alpha_c = normalized row minimum") : cert.note;
  return cert;
}

double mix_extension_bound(const AssumptionCertificate& mix, std::size_t k) {
  if (mix.kind != AssumptionKind::Mix || !mix.holds) throw InvalidArgument("needs a holding Mix certificate");
  if (k == 0) throw InvalidArgument("extension factor must be >= 1");
  if (mix.param("Ds_in_Dn") != 1.0) throw InvalidArgument("extension needs D_s inside D_n");
  double c = mix.param("c_raw");
  return c * std::pow(c * mix.param("alpha_c_Ds"), static_cast<double>(k - 1));
}

AssumptionCertificate check_dc(const SubMarkovGenerator& gen, const Exhaustion& exh, const ProbabilityVector& alpha_c,
                               double t_floor, std::span<const double> t_grid, const EigenPair& ep, double tol) {
  exh.validate(gen.size());
  if (alpha_c.size() != gen.size()) throw DimensionMismatch("alpha_c length differs from state count");
  for (double t : t_grid)
    if (t < t_floor) throw InvalidArgument("t_grid must lie in [t_floor, inf)");
  AssumptionCertificate cert;
  cert.kind = AssumptionKind::Dc;
  cert.alpha_c = alpha_c;
  cert.t_grid.assign(t_grid.begin(), t_grid.end());
  const auto& dc = exh.set(exh.c);

  Propagator prop(gen, tol);
  auto curves = log_survival_curves(prop, t_grid);
  double worst = 0.0;
  std::optional<std::size_t> arg;
  for (const auto& row : curves) {
    double la = log_mix(alpha_c.span(), row);
    if (!std::isfinite(la)) throw ExtinctMass("P_alpha_c(t < ext) vanished on the grid");
    for (auto x : dc) {
      double r = std::exp(row[x] - la);
      if (r > worst) {
        worst = r;
        arg = x;
      }
    }
  }
  double ae = dot(alpha_c.span(), ep.eta);
  double limit = 0.0;
  for (auto x : dc) limit = std::max(limit, ep.eta[x] / ae);
  double c_raw = std::max(worst, limit);
  cert.params["t_floor"] = t_floor;
  cert.params["grid_max"] = worst;
  cert.params["limit"] = limit;
  cert.params["c_raw"] = c_raw;
  cert.params["c"] = kSafetyFactor * c_raw;
  cert.holds = std::isfinite(c_raw);
  if (!cert.holds) cert.counterexample = arg;
  return cert;
}

EscapeMoments escape_moments(const SubMarkovGenerator& gen, const Exhaustion& exh, double rho) {
  exh.validate(gen.size());
  if (!(rho > 0.0)) throw InvalidArgument("escape moment needs rho > 0");
  EscapeMoments em;
  em.transitory = exh.complement(exh.c, gen.size());
  const std::size_t nt = em.transitory.size();
  if (nt == 0) {
    em.admissible = true;
    em.e_T = 1.0;
    return em;
  }
  std::vector<std::size_t> local(gen.size(), nt);
  for (std::size_t a = 0; a < nt; ++a) local[em.transitory[a]] = a;
  // (Q_TT + rho I) g = -rho 1, f = 1 + g.
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t a = 0; a < nt; ++a) {
    std::size_t x = em.transitory[a];
    trip.emplace_back(a, a, gen.diag(x) + rho);
    auto cols = gen.row_cols(x);
    auto vals = gen.row_rates(x);
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (local[cols[k]] < nt) trip.emplace_back(a, local[cols[k]], vals[k]);
  }
  Eigen::SparseMatrix<double> a(nt, nt);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SingularSystem("escape system is singular at rho = " + std::to_string(rho));
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(nt, -rho);
  Eigen::VectorXd g = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SingularSystem("escape solve failed");
  em.f.resize(nt);
  em.admissible = true;
  double worst_g = kInf;
  double max_f = 1.0;
  for (std::size_t k = 0; k < nt; ++k) {
    double gk = g(static_cast<Eigen::Index>(k));
    em.f[k] = 1.0 + gk;
    // -(Q_TT + rho I) is a nonsingular M-matrix iff the solution is positive.
    if (!std::isfinite(gk) || !(gk > 0.0)) em.admissible = false;
    if (gk < worst_g) {
      worst_g = gk;
      if (!em.admissible) em.worst_state = em.transitory[k];
    }
    if (gk + 1.0 > max_f) {
      max_f = gk + 1.0;
      if (em.admissible) em.worst_state = em.transitory[k];
    }
  }
  em.e_T = em.admissible ? max_f : kInf;
  return em;
}

double escape_rate_ceiling(const SubMarkovGenerator& gen, const Exhaustion& exh, int iterations) {
  auto t = exh.complement(exh.c, gen.size());
  if (t.empty()) return kInf;
  // The Perron rate of Q_TT is at most the smallest diagonal exit rate on T.
  double hi = kInf;
  for (auto x : t) hi = std::min(hi, gen.exit_rate(x));
  double lo = 0.0;
  auto ok = [&](double rho) {
    try {
      return escape_moments(gen, exh, rho).admissible;
    } catch (const SingularSystem&) {
      return false;
    }
  };
  for (int it = 0; it < iterations; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ok(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.99 * lo;
}

AssumptionCertificate check_et(const SubMarkovGenerator& gen, const Exhaustion& exh, double rho) {
  AssumptionCertificate cert;
  cert.kind = AssumptionKind::eT;
  cert.params["rho"] = rho;
  try {
    auto em = escape_moments(gen, exh, rho);
    cert.holds = em.admissible;
    cert.params["e_T_raw"] = em.e_T;
    cert.params["e_T"] = em.admissible ? kSafetyFactor * em.e_T : kInf;
    cert.params["transitory_states"] = static_cast<double>(em.transitory.size());
    if (!em.admissible) {
      cert.counterexample = em.worst_state;
      cert.note = "rho exceeds the escape rate of the transitory domain";
    } else if (em.transitory.empty()) {
      cert.note = "empty transitory domain";
    }
  } catch (const SingularSystem& e) {
    cert.holds = false;
    cert.params["e_T_raw"] = kInf;
    cert.params["e_T"] = kInf;
    cert.note = e.what();
  }
  return cert;
}

AssumptionCertificate check_sv(const SubMarkovGenerator& gen, const Exhaustion& exh, std::span<const double> t_grid,
                               double tol) {
  exh.validate(gen.size());
  const auto& ds = exh.set(exh.s);
  const auto& dm = exh.set(exh.m);
  auto killed = gen.restrict_to(dm);
  double rho = perron_rate(killed);
  Propagator prop(killed, tol);
  auto curves = log_survival_curves(prop, t_grid);
  auto pos = positions_in(ds, dm);
  double c = 1.0;  // value at t = 0
  std::optional<std::size_t> arg;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    for (std::size_t a = 0; a < ds.size(); ++a) {
      double v = std::exp(curves[g][pos[a]] + rho * t_grid[g]);
      if (v < c) {
        c = v;
        arg = ds[a];
      }
    }
  }
  AssumptionCertificate cert;
  cert.kind = AssumptionKind::Sv;
  cert.t_grid.assign(t_grid.begin(), t_grid.end());
  cert.params["rho_sv"] = rho;
  cert.params["c_raw"] = c;
  cert.params["c"] = c / kSafetyFactor;
  cert.params["s"] = static_cast<double>(exh.s);
  cert.params["m"] = static_cast<double>(exh.m);
  cert.holds = c > 0.0 && std::isfinite(rho);
  if (!cert.holds) cert.counterexample = arg;
  cert.note = "killed Perron rate of D_m";
  return cert;
}

AssumptionCertificate check_sv_regeneration(const AssumptionCertificate& mix) {
  if (mix.kind != AssumptionKind::Mix) throw InvalidArgument("regeneration route needs a Mix certificate");
  AssumptionCertificate cert;
  cert.kind = AssumptionKind::Sv;
  cert.note = "regeneration route";
  if (!mix.holds) {
    cert.holds = false;
    return cert;
  }
  double c_rg = mix.param("c") * mix.param("alpha_c_Ds");
  double t_rg = mix.param("t");
  cert.params["c_rg"] = c_rg;
  cert.params["t_rg"] = t_rg;
  cert.params["rho_sv"] = c_rg > 0.0 ? -std::log(c_rg) / t_rg : kInf;
  cert.params["c_raw"] = c_rg;
  cert.params["c"] = c_rg;
  cert.holds = c_rg > 0.0;
  return cert;
}

AssumptionCertificate check_lj() {
  AssumptionCertificate cert;
  cert.kind = AssumptionKind::LJ;
  cert.holds = true;
  cert.note = "holds by truncation: finite state space, nothing tested";
  return cert;
}

std::vector<double> default_time_grid(const SubMarkovGenerator& gen, const EigenPair& ep) {
  double lmax = std::max(gen.max_exit_rate(), 1e-12);
  double t_lo = 0.01 / lmax;
  double rate = std::isfinite(ep.gap_estimate) && ep.gap_estimate > 0.0 ? ep.gap_estimate
                                                                       : std::max(ep.lambda0, 1e-3);
  double t_hi = std::max(30.0 / rate, 100.0 * t_lo);
  return log_grid(t_lo, t_hi, 64);
}

namespace {

// min over x in starts, y with alpha_c(y) > 0, of P_x(X_t = y) / alpha_c(y).
double mix_constant(const std::vector<Vector>& rows, const ProbabilityVector& alpha_c) {
  double c = kInf;
  for (const auto& r : rows)
    for (std::size_t y = 0; y < r.size(); ++y)
      if (alpha_c[y] > 0.0) c = std::min(c, r[y] / alpha_c[y]);
  return std::isfinite(c) ? std::max(c, 0.0) : 0.0;
}

}  // namespace

CouplingConstants derive_coupling_constants(const SubMarkovGenerator& gen, const Exhaustion& exh,
                                            const CertificateSet& certs, const EigenPair& ep,
                                            const CouplingOptions& opts, CouplingDiagnostics* diag) {
  exh.validate(gen.size());
  for (auto* c : certs.all())
    if (!c->holds) throw AssumptionViolated("certificate " + to_string(c->kind) + " does not hold");
  double rho_et = certs.et.param("rho");
  double rho_sv = certs.sv.param("rho_sv");
  if (!(rho_et > rho_sv))
    throw AssumptionViolated("escape rate " + std::to_string(rho_et) + " does not exceed survival rate " +
                             std::to_string(rho_sv));
  if (!certs.mix.alpha_c) throw InvalidArgument("Mix certificate carries no alpha_c");
  const ProbabilityVector& alpha_c = *certs.mix.alpha_c;
  CouplingDiagnostics local;
  CouplingDiagnostics& dg = diag ? *diag : local;

  CouplingConstants k;
  k.alpha_c = alpha_c;
  k.n_rn = opts.n_rn.value_or(exh.last());
  k.xi_rn = opts.xi_rn;
  if (!(k.xi_rn > 0.0 && k.xi_rn <= 1.0)) throw InvalidArgument("xi_rn must lie in (0, 1]");

  // (t_ps, c_ps): R(t) = max_x P_x(t < ext) / P_alpha_c(t < ext).
  std::vector<double> grid = opts.t_grid.empty() ? default_time_grid(gen, ep) : opts.t_grid;
  Propagator prop(gen, opts.tol);
  auto curves = log_survival_curves(prop, grid);
  double ae = dot(alpha_c.span(), ep.eta);
  double r_inf = 0.0;
  for (double e : ep.eta) r_inf = std::max(r_inf, e / ae);
  dg.ratio_limit = r_inf;
  std::vector<double> r(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double la = log_mix(alpha_c.span(), curves[g]);
    if (!std::isfinite(la)) throw ExtinctMass("P_alpha_c(t < ext) vanished on the grid");
    double m = 0.0;
    for (double lx : curves[g]) m = std::max(m, std::exp(lx - la));
    r[g] = m;
  }
  std::vector<double> tail_sup(grid.size());
  double run = r_inf;
  for (std::size_t g = grid.size(); g-- > 0;) {
    run = std::max(run, r[g]);
    tail_sup[g] = run;
  }
  std::size_t g_ps = 0;
  while (g_ps + 1 < grid.size() && tail_sup[g_ps] > kSafetyFactor * r_inf) ++g_ps;
  k.t_ps = grid[g_ps];
  dg.c_ps_raw = tail_sup[g_ps];
  k.c_ps = kSafetyFactor * tail_sup[g_ps];

  // (t_db, c_db): minorization from D_rn, scanned over t_db to maximize zeta.
  const auto& drn = exh.set(k.n_rn);
  std::vector<double> cand = opts.t_db_candidates;
  if (cand.empty()) {
    double tau = std::isfinite(ep.gap_estimate) && ep.gap_estimate > 0.0 ? 1.0 / ep.gap_estimate
                                                                        : 1.0 / std::max(ep.lambda0, 1e-3);
    tau = std::max(tau, certs.mix.param("t"));
    cand = log_grid(0.1 * tau, 10.0 * tau, 16);
  }
  std::sort(cand.begin(), cand.end());
  std::vector<ScaledVector> rows;
  for (auto x : drn) {
    Vector e(gen.size(), 0.0);
    e[x] = 1.0;
    rows.push_back(ScaledVector::from(std::move(e)));
  }
  double best_zeta = -1.0, t_prev = 0.0;
  for (double t : cand) {
    rows = prop.apply_batch(Side::Left, rows, t - t_prev);
    t_prev = t;
    std::vector<Vector> plain;
    for (const auto& sv : rows) plain.push_back(sv.unscaled());
    double c_m = mix_constant(plain, alpha_c);
    double c_db = k.xi_rn * c_m / kSafetyFactor;
    double zeta = c_db > 0.0 ? -std::log1p(-c_db / k.c_ps) / t : 0.0;
    dg.t_db_scan.push_back(t);
    dg.zeta_scan.push_back(zeta);
    if (zeta > best_zeta) {
      best_zeta = zeta;
      k.t_db = t;
      k.c_db = c_db;
      dg.c_db_raw = k.xi_rn * c_m;
    }
  }
  if (!(best_zeta > 0.0)) throw AssumptionViolated("no t_db candidate gives a positive minorization from D_rn");

  // Renewal inequality over the vertices of M_rn = {mu : mu(D_rn) >= xi_rn}.
  {
    Vector ind(gen.size(), 0.0);
    for (auto x : drn) ind[x] = 1.0;
    Vector a = prop.apply(Side::Right, ind, k.t_db);
    Vector b = prop.apply(Side::Right, Vector(gen.size(), 1.0), k.t_db);
    auto in = exh.indicator(k.n_rn, gen.size());
    double worst = kInf;
    auto lhs = [&](double num, double den) { return (num / den - k.c_db) / (1.0 - k.c_db); };
    for (auto x : drn) {
      worst = std::min(worst, lhs(a[x], b[x]));
      for (std::size_t y = 0; y < gen.size(); ++y) {
        if (in[y]) continue;
        double num = k.xi_rn * a[x] + (1.0 - k.xi_rn) * a[y];
        double den = k.xi_rn * b[x] + (1.0 - k.xi_rn) * b[y];
        worst = std::min(worst, lhs(num, den));
      }
    }
    dg.renewal_margin = worst - k.xi_rn;
    if (worst < k.xi_rn - 1e-12) throw AssumptionViolated("renewal inequality fails on M_rn");
  }
  k.t_xt = 0.0;
  k.validate();
  return k;
}

double eta_sup_bound(const CouplingConstants& consts, const AssumptionCertificate& mix, const Exhaustion& exh,
                     const EigenPair& ep) {
  double t_mx = mix.param("t");
  double c_mx = mix.param("c");
  auto n = static_cast<std::size_t>(mix.param("n"));
  double alpha_dn = ep.alpha.mass_on(exh.set(n));
  double c_prime = consts.c_ps * std::exp(-ep.lambda0 * t_mx) / (alpha_dn * c_mx);
  return std::max(c_prime, std::exp(ep.lambda0 * consts.t_ps));
}

MassRetentionReport verify_mass_retention(const SubMarkovGenerator& gen, const Exhaustion& exh,
                                          const std::vector<ProbabilityVector>& mus, std::span<const double> t_grid,
                                          const EigenPair& ep, double tol) {
  exh.validate(gen.size());
  Propagator prop(gen, tol);
  // mass[mu][g][n] = mu A_t(D_n)
  std::vector<std::vector<Vector>> mass(mus.size());
  const std::ptrdiff_t nm = static_cast<std::ptrdiff_t>(mus.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < nm; ++i) {
    ScaledVector v = ScaledVector::from(mus[i].weights());
    double t_prev = 0.0;
    for (double t : t_grid) {
      v = prop.apply(Side::Left, v, t - t_prev);
      t_prev = t;
      double s = sum(v.values);
      Vector per(exh.count());
      for (std::size_t n = 0; n < exh.count(); ++n) {
        double m = 0.0;
        for (auto x : exh.set(n)) m += v.values[x];
        per[n] = m / s;
      }
      mass[i].push_back(std::move(per));
    }
  }
  auto retention_time = [&](std::size_t i, std::size_t n, double xi) -> std::optional<double> {
    std::optional<double> t;
    for (std::size_t g = t_grid.size(); g-- > 0;) {
      if (mass[i][g][n] + 1e-12 < xi) break;
      t = t_grid[g];
    }
    if (t && *t == t_grid.front()) t = 0.0;
    return t;
  };
  MassRetentionReport rep;
  bool chosen = false;
  for (std::size_t n = 0; n < exh.count(); ++n) {
    double an = ep.alpha.mass_on(exh.set(n));
    RetentionLevel lvl{n, an * an, std::nullopt};
    if (n == exh.last()) {
      lvl.xi = 1.0;
      lvl.t_xt = 0.0;
    } else {
      double worst = 0.0;
      bool all = true;
      for (std::size_t i = 0; i < mus.size(); ++i) {
        auto t = retention_time(i, n, lvl.xi);
        if (!t) {
          all = false;
          break;
        }
        worst = std::max(worst, *t);
      }
      if (all) lvl.t_xt = worst;
    }
    if (!chosen && lvl.t_xt && an >= 0.5) {
      rep.chosen = rep.levels.size();
      chosen = true;
    }
    rep.levels.push_back(lvl);
  }
  if (!chosen) rep.chosen = rep.levels.size() - 1;
  const auto& lvl = rep.levels[rep.chosen];
  for (std::size_t i = 0; i < mus.size(); ++i)
    rep.per_mu_time.push_back(lvl.n == exh.last() ? std::optional<double>(0.0) : retention_time(i, lvl.n, lvl.xi));
  return rep;
}

std::vector<ProbabilityVector> stress_set(std::size_t n_states, std::size_t n_random, unsigned long long seed) {
  std::vector<ProbabilityVector> out;
  for (std::size_t x = 0; x < n_states; ++x) out.push_back(ProbabilityVector::delta(n_states, x));
  std::exponential_distribution<double> ex(1.0);
  for (std::size_t r = 0; r < n_random; ++r) {
    RngStream g(seed, r);
    Vector w(n_states);
    double s = 0.0;
    for (auto& v : w) s += (v = ex(g));
    for (auto& v : w) v /= s;
    out.emplace_back(std::move(w));
  }
  return out;
}

ReplayResult replay_certificate(const AssumptionCertificate& cert, const SubMarkovGenerator& gen,
                                const Exhaustion& exh, const EigenPair& ep, double tol) {
  ReplayResult rr;
  if (!cert.holds) {
    rr.ok = true;
    rr.detail = "failing certificate: nothing to replay";
    return rr;
  }
  double worst = kInf;
  switch (cert.kind) {
    case AssumptionKind::Mix: {
      auto n = static_cast<std::size_t>(cert.param("n"));
      auto m = static_cast<std::size_t>(cert.param("m"));
      double c = cert.param("c");
      auto rows = killed_kernel_rows(gen, exh.set(n), exh.set(m), cert.param("t"), tol);
      for (const auto& r : rows)
        for (std::size_t y = 0; y < r.size(); ++y) worst = std::min(worst, r[y] - c * (*cert.alpha_c)[y]);
      break;
    }
    case AssumptionKind::Dc: {
      double c = cert.param("c");
      Propagator prop(gen, tol);
      auto curves = log_survival_curves(prop, cert.t_grid);
      double ae = dot(cert.alpha_c->span(), ep.eta);
      for (auto x : exh.set(exh.c)) worst = std::min(worst, c - ep.eta[x] / ae);
      for (const auto& row : curves) {
        double la = log_mix(cert.alpha_c->span(), row);
        for (auto x : exh.set(exh.c)) worst = std::min(worst, c - std::exp(row[x] - la));
      }
      break;
    }
    case AssumptionKind::eT: {
      auto em = escape_moments(gen, exh, cert.param("rho"));
      worst = em.admissible ? cert.param("e_T") - em.e_T : -kInf;
      break;
    }
    case AssumptionKind::Sv: {
      if (cert.has("c_rg")) {
        worst = 0.0;
        break;
      }
      double rho = cert.param("rho_sv"), c = cert.param("c");
      const auto& dm = exh.set(exh.m);
      auto killed = gen.restrict_to(dm);
      Propagator prop(killed, tol);
      auto curves = log_survival_curves(prop, cert.t_grid);
      auto pos = positions_in(exh.set(exh.s), dm);
      worst = 1.0 - c;
      for (std::size_t g = 0; g < cert.t_grid.size(); ++g)
        for (auto p : pos) worst = std::min(worst, std::exp(curves[g][p] + rho * cert.t_grid[g]) - c);
      break;
    }
    case AssumptionKind::LJ:
      worst = 0.0;
      break;
  }
  rr.worst_slack = worst;
  rr.ok = worst >= 0.0;
  rr.detail = rr.ok ? "defining inequality re-verified" : "defining inequality violated";
  return rr;
}

}  // namespace qsd
