#include "qsd/models/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

void DiffusionSpec::validate() const {
  if (dim == 0) throw InvalidArgument("trait dimension must be positive");
  if (!r || !b) throw InvalidArgument("growth rate and trait drift are required");
  if (!(c >= 0.0) || !(sigma_N >= 0.0)) throw InvalidArgument("need c >= 0 and sigma_N >= 0");
  if (!(capacity > 0.0)) throw InvalidArgument("capacity must be positive");
}

DiffusionSpec quadratic_well(const QuadraticWellParams& p) {
  if (!(p.c > 0.0) || !(p.sigma_N >= 0.0) || !(p.a > 0.0))
    throw InvalidArgument("quadratic well needs a, c > 0 and sigma_N >= 0");
  DiffusionSpec s;
  s.dim = p.dim;
  s.c = p.c;
  s.sigma_N = p.sigma_N;
  s.r = [r0 = p.r0, a = p.a](std::span<const double> x) { return r0 - a * norm2(x); };
  s.r_tail = [r0 = p.r0, a = p.a](double radius) { return r0 - a * radius * radius; };
  s.b = [th = p.theta](std::span<const double> x, double, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -th * x[i];
  };
  s.sigma_X = [v = p.sigma_X](std::span<const double>, double) { return v; };
  if (p.rho0 != 0.0 || p.rho1 != 0.0)
    s.rho_c = [r0 = p.rho0, r1 = p.rho1](std::span<const double> x, double) { return r0 + r1 * norm2(x); };
  s.capacity = std::max(p.r0, 1e-3) / p.c;
  return s;
}

DiffusionSpec tabulated_growth(DiffusionSpec base, std::vector<double> radii, std::vector<double> values) {
  if (radii.size() < 2 || radii.size() != values.size()) throw InvalidArgument("growth table needs >= 2 matched points");
  if (!std::is_sorted(radii.begin(), radii.end())) throw InvalidArgument("growth table radii must increase");
  auto interp = [radii, values](double rad) {
    if (rad <= radii.front()) return values.front();
    if (rad >= radii.back()) return values.back();
    auto it = std::upper_bound(radii.begin(), radii.end(), rad);
    std::size_t k = static_cast<std::size_t>(it - radii.begin());
    double w = (rad - radii[k - 1]) / (radii[k] - radii[k - 1]);
    return (1 - w) * values[k - 1] + w * values[k];
  };
  base.r = [interp](std::span<const double> x) { return interp(std::sqrt(norm2(x))); };
  base.r_tail = [radii, values](double rad) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < radii.size(); ++k)
      if (radii[k] >= rad || k + 1 == radii.size()) m = std::max(m, values[k]);
    return m;
  };
  return base;
}

DiffusionSpec feller(double r_plus, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  DiffusionSpec s;
  s.dim = 1;
  s.c = 0.0;
  s.sigma_N = sigma;
  s.r = [r_plus](std::span<const double>) { return r_plus; };
  s.r_tail = [r_plus](double) { return r_plus; };
  s.b = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
  s.capacity = 1.0;
  return s;
}

DiffusionStepper::DiffusionStepper(const DiffusionSpec& spec, Point x, double n, RngStream& g,
                                   DiffusionOptions opts)
    : spec_(&spec), x_(std::move(x)), n_(n), g_(&g), opts_(opts), bx_(spec.dim) {
  if (x_.size() != spec.dim) throw DimensionMismatch("initial trait has the wrong dimension");
  if (!(n_ > 0.0)) throw InvalidArgument("initial population must be positive");
  if (opts_.eps_abs <= 0.0) opts_.eps_abs = 1e-6 * spec.capacity;
  refresh_bound();
}

double DiffusionStepper::drift_n() const { return (spec_->r(x_) - spec_->c * n_) * n_; }

void DiffusionStepper::refresh_bound() {
  double rc = spec_->rho_c ? spec_->rho_c(x_, n_) : 0.0;
  rho_bar_ = 2.0 * rc;
  next_candidate_ = rho_bar_ > 0.0 ? t_ - std::log(uniform_open(*g_)) / rho_bar_
                                   : std::numeric_limits<double>::infinity();
}

bool DiffusionStepper::step(double dt, const StopFn& stop) {
  if (absorbed_ != Absorption::None || stopped_) return true;
  double remaining = dt;
  const std::size_t d = spec_->dim;
  while (remaining > 0.0) {
    double rx = spec_->r(x_);
    spec_->b(x_, n_, bx_);
    double sx = spec_->sigma_X ? spec_->sigma_X(x_, n_) : 0.0;
    double h = remaining;
    if (opts_.adaptive) {
      double rate = std::abs(rx - spec_->c * n_);
      if (rate * h > opts_.stability) h = opts_.stability / rate;
      double bn = std::sqrt(norm2(bx_));
      double scale = 1.0 + std::sqrt(norm2(x_));
      if (bn * h > opts_.stability * scale) h = opts_.stability * scale / bn;
    }
    if (!std::isfinite(rx) || !std::isfinite(h) || !std::isfinite(sx)) throw InvalidArgument("nonfinite drift");
    if (spec_->rho_c) {
      double rc = spec_->rho_c(x_, n_);
      if (rc > rho_bar_) {
        rho_bar_ = 2.0 * rc;
        next_candidate_ = t_ - std::log(uniform_open(*g_)) / rho_bar_;
      }
      while (next_candidate_ <= t_ + h) {
        if (uniform_open(*g_) * rho_bar_ < rc) {
          t_ = next_candidate_;
          absorbed_ = Absorption::Catastrophe;
          n_ = 0.0;
          return true;
        }
        next_candidate_ += -std::log(uniform_open(*g_)) / rho_bar_;
      }
    }
    double sq = std::sqrt(h);
    double dn = (rx - spec_->c * n_) * n_ * h + spec_->sigma_N * std::sqrt(n_) * sq * normal_(*g_);
    for (std::size_t i = 0; i < d; ++i) {
      double noise = sx != 0.0 ? sx * sq * normal_(*g_) : 0.0;
      x_[i] += bx_[i] * h + noise;
    }
    n_ += dn;
    t_ += h;
    remaining -= h;
    if (remaining < 1e-15 * dt) remaining = 0.0;
    if (n_ <= opts_.eps_abs) {
      n_ = 0.0;
      absorbed_ = Absorption::Fluctuation;
      return true;
    }
    if (stop && stop(x_, n_)) {
      stopped_ = true;
      return true;
    }
  }
  if (++steps_ % opts_.refresh == 0) refresh_bound();
  return false;
}

DiffusionPath simulate_diffusion(const DiffusionSpec& spec, const Point& x0, double n0, double dt, double t_max,
                                 RngStream& g, DiffusionOptions opts) {
  spec.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  DiffusionStepper st(spec, x0, n0, g, opts);
  DiffusionPath p;
  p.times.push_back(0.0);
  p.x.push_back(x0);
  p.n.push_back(n0);
  auto steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    double h = std::min(dt, t_max - static_cast<double>(k) * dt);
    if (st.step(h)) break;
    p.times.push_back(st.time());
    p.x.push_back(st.x());
    p.n.push_back(st.n());
  }
  if (st.absorbed() != Absorption::None) {
    p.absorption = st.absorbed();
    p.extinction_time = st.time();
    p.times.push_back(st.time());
    p.x.push_back(st.x());
    p.n.push_back(0.0);
  }
  return p;
}

ProbabilityEstimate feller_extinction_mc(double z0, double r_plus, double sigma, double t, double dt,
                                         std::size_t n_paths, std::uint64_t seed) {
  auto spec = feller(r_plus, sigma);
  std::vector<char> dead(n_paths, 0);
  auto np = static_cast<std::ptrdiff_t>(n_paths);
  auto steps = static_cast<std::size_t>(std::llround(t / dt));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    RngStream g(seed, static_cast<std::uint64_t>(i));
    DiffusionStepper st(spec, {0.0}, z0, g);
    for (std::size_t k = 0; k < steps; ++k)
      if (st.step(dt)) break;
    dead[static_cast<std::size_t>(i)] = st.absorbed() != Absorption::None;
  }
  ProbabilityEstimate e;
  e.n = n_paths;
  e.p = static_cast<double>(std::count(dead.begin(), dead.end(), 1)) / static_cast<double>(n_paths);
  e.stderr_ = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(n_paths));
  return e;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::DeltaC: return "Delta_c";
    case Region::TY: return "T^Y_inf";
    case Region::T0: return "T_0";
    case Region::TX: return "T^X_inf";
  }
  return "?";
}

void TransitoryDecomposition::validate() const {
  if (!(y_inf > 0.0) || !(n_c > y_inf)) throw InvalidArgument("need n_c > y_inf > 0");
  if (!(n_c > 1.0)) throw InvalidArgument("need n_c > 1 so that 1/n_c < n_c");
  if (!(sigma_N > 0.0)) throw InvalidArgument("sigma_N must be positive");
}

Region TransitoryDecomposition::classify(std::span<const double> x, double n) const {
  double y = to_y(n, sigma_N);
  bool inside = norm2(x) < n_c * n_c;
  if (inside) {
    if (y > n_c) return Region::TY;
    if (y <= 1.0 / n_c) return Region::T0;
    return Region::DeltaC;
  }
  return y > y_inf ? Region::TY : Region::TX;
}

std::vector<std::pair<Point, double>> TransitoryDecomposition::start_grid(Region r, std::size_t dim) const {
  auto pt = [&](double x1, double y) {
    Point x(dim, 0.0);
    x[0] = x1;
    return std::pair<Point, double>{x, to_n(y, sigma_N)};
  };
  std::vector<std::pair<Point, double>> out;
  switch (r) {
    case Region::TY:
      for (double x1 : {0.0, 0.5 * n_c, 0.99 * n_c})
        for (double y : {1.01 * n_c, 2.0 * n_c, 4.0 * n_c}) out.push_back(pt(x1, y));
      for (double x1 : {1.01 * n_c, 1.5 * n_c})
        for (double y : {1.01 * y_inf, 2.0 * n_c}) out.push_back(pt(x1, y));
      break;
    case Region::T0:
      for (double x1 : {0.0, 0.5 * n_c, 0.99 * n_c})
        for (double y : {0.5 / n_c, 1.0 / n_c}) out.push_back(pt(x1, y));
      break;
    case Region::TX:
      for (double x1 : {1.01 * n_c, 1.5 * n_c})
        for (double y : {0.5 / n_c, 1.01 / n_c, std::sqrt(y_inf / n_c), y_inf}) out.push_back(pt(x1, y));
      break;
    case Region::DeltaC:
      out.push_back(pt(0.0, 0.5 * (1.0 / n_c + n_c)));
      break;
  }
  return out;
}

namespace {

struct Outcome {
  double time;
  Region end;
  bool absorbed;
};

// Runs from (x, n) until `stop` fires, absorption, or t_end.
Outcome run_until(const DiffusionSpec& spec, const TransitoryDecomposition& dec, const Point& x, double n,
                  double t_end, double dt, RngStream& g, const DiffusionOptions& opts,
                  const DiffusionStepper::StopFn& stop) {
  if (stop(x, n)) return {0.0, dec.classify(x, n), false};
  DiffusionStepper st(spec, x, n, g, opts);
  while (st.time() < t_end) {
    double h = std::min(dt, t_end - st.time());
    if (h <= 1e-15) break;
    if (st.step(h, stop)) break;
  }
  bool dead = st.absorbed() != Absorption::None;
  return {std::min(st.time(), t_end), dead ? Region::DeltaC : dec.classify(st.x(), st.n()), dead};
}

template <class F>
std::vector<Outcome> batch(std::size_t n_paths, std::uint64_t seed, std::uint64_t offset, F&& f) {
  std::vector<Outcome> out(n_paths);
  auto np = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    RngStream g(seed, offset + static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = f(g);
  }
  return out;
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  double n = static_cast<double>(v.size());
  double m = s / n;
  return {m, std::sqrt(std::max(s2 / n - m * m, 0.0) / n)};
}

constexpr std::uint64_t kStartStride = std::uint64_t{1} << 32;

}  // namespace

EscapeMomentEstimate escape_moment_mc(const DiffusionSpec& spec, const TransitoryDecomposition& dec, double rho,
                                      Region region, std::size_t n_paths, std::uint64_t seed,
                                      const EscapeOptions& opts) {
  spec.validate();
  dec.validate();
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  double cap = opts.t_cap > 0.0 ? opts.t_cap : 50.0 / rho;
  EscapeMomentEstimate est{region, rho, 0.0, 0.0, 0, {}};
  auto grid = dec.start_grid(region, spec.dim);
  auto in_dc = [&](std::span<const double> x, double n) { return dec.classify(x, n) == Region::DeltaC; };
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const auto& [x, n] = grid[s];
    auto res = batch(n_paths, seed, (static_cast<std::uint64_t>(region) * 64 + s) * kStartStride, [&](RngStream& g) {
      return run_until(spec, dec, x, n, cap, opts.dt, g, opts.diffusion, in_dc);
    });
    std::vector<double> vals;
    std::size_t capped = 0;
    for (const auto& o : res) {
      bool done = o.absorbed || o.end == Region::DeltaC;
      if (!done) ++capped;
      vals.push_back(std::exp(rho * o.time));
    }
    auto [m, se] = mean_se(vals);
    est.starts.push_back({x, n, m, se, capped});
    est.capped += capped;
    if (m > est.sup) {
      est.sup = m;
      est.stderr_ = se;
    }
  }
  return est;
}

EscapeConstants estimate_escape_constants(const DiffusionSpec& spec, const TransitoryDecomposition& dec, double rho,
                                          std::size_t n_paths, std::uint64_t seed, const EscapeOptions& opts) {
  spec.validate();
  dec.validate();
  EscapeConstants k{};
  k.rho = rho;
  k.t_D = std::log(2.0) / rho;
  k.t_m = k.t_D;
  double cap = opts.t_cap > 0.0 ? opts.t_cap : 50.0 / rho;
  std::uint64_t base = std::uint64_t{1} << 40;

  auto ty = dec.start_grid(Region::TY, spec.dim);
  for (std::size_t s = 0; s < ty.size(); ++s) {
    auto leave = [&](std::span<const double> x, double n) { return dec.classify(x, n) != Region::TY; };
    auto res = batch(n_paths, seed, base + s * kStartStride, [&](RngStream& g) {
      return run_until(spec, dec, ty[s].first, ty[s].second, cap, opts.dt, g, opts.diffusion, leave);
    });
    std::vector<double> v;
    for (const auto& o : res) v.push_back(std::exp(rho * o.time));
    auto [m, se] = mean_se(v);
    if (m > k.C_Y) {
      k.C_Y = m;
      k.C_Y_se = se;
    }
  }

  auto tx = dec.start_grid(Region::TX, spec.dim);
  for (std::size_t s = 0; s < tx.size(); ++s) {
    // The excursion ends on reaching the core, T0, or the level y = n_c; crossing
    // y_inf below that level only matters through the position at t_D.
    auto leave = [&](std::span<const double> x, double n) {
      Region r = dec.classify(x, n);
      return r == Region::DeltaC || r == Region::T0 || to_y(n, dec.sigma_N) >= dec.n_c;
    };
    auto res = batch(n_paths, seed, 2 * base + s * kStartStride, [&](RngStream& g) {
      return run_until(spec, dec, tx[s].first, tx[s].second, k.t_D, opts.dt, g, opts.diffusion, leave);
    });
    double px = 0.0, py = 0.0;
    for (const auto& o : res) {
      if (o.absorbed) continue;
      if (o.end == Region::TX) px += 1.0;
      if (o.end == Region::TY) py += 1.0;
    }
    k.p_X = std::max(k.p_X, px / static_cast<double>(n_paths));
    k.p_Y = std::max(k.p_Y, py / static_cast<double>(n_paths));
  }
  double e = std::exp(rho * k.t_D);
  k.C_X = e * k.p_X < 1.0 ? e / (1.0 - e * k.p_X) : std::numeric_limits<double>::infinity();
  k.eps_X = e * k.p_X < 1.0 ? e * k.p_Y / (1.0 - e * k.p_X) : std::numeric_limits<double>::infinity();

  auto t0 = dec.start_grid(Region::T0, spec.dim);
  for (std::size_t s = 0; s < t0.size(); ++s) {
    auto in_dc = [&](std::span<const double> x, double n) { return dec.classify(x, n) == Region::DeltaC; };
    auto res = batch(n_paths, seed, 3 * base + s * kStartStride, [&](RngStream& g) {
      return run_until(spec, dec, t0[s].first, t0[s].second, k.t_m, opts.dt, g, opts.diffusion, in_dc);
    });
    double p = 0.0;
    for (const auto& o : res)
      if (!o.absorbed && o.end != Region::DeltaC) p += 1.0;
    k.p_0 = std::max(k.p_0, p / static_cast<double>(n_paths));
  }
  double em = std::exp(rho * k.t_m);
  k.C_0 = em * k.p_0 < 1.0 ? em / (1.0 - em * k.p_0) : std::numeric_limits<double>::infinity();
  k.eps_0 = em * k.p_0 < 1.0 ? em * k.p_0 / (1.0 - em * k.p_0) : std::numeric_limits<double>::infinity();
  return k;
}

bool EscapeReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& c) { return c.holds; });
}

EscapeReport escape_report(const DiffusionSpec& spec, const TransitoryDecomposition& dec, double rho,
                           std::size_t n_paths, std::uint64_t seed, const EscapeOptions& opts) {
  EscapeReport r{escape_moment_mc(spec, dec, rho, Region::TY, n_paths, seed, opts),
                 escape_moment_mc(spec, dec, rho, Region::TX, n_paths, seed, opts),
                 escape_moment_mc(spec, dec, rho, Region::T0, n_paths, seed, opts),
                 estimate_escape_constants(spec, dec, rho, n_paths, seed, opts),
                 {},
                 0.0};
  const auto& k = r.k;
  double eY = r.E_Y.sup, eX = r.E_X.sup, e0 = r.E_0.sup;
  double sY = r.E_Y.stderr_, sX = r.E_X.stderr_, s0 = r.E_0.stderr_;
  auto z = [](double a, double b2) { return 1.96 * std::sqrt(a * a + b2); };
  auto add = [&](std::string name, double lhs, double rhs, double tol) {
    r.checks.push_back({std::move(name), lhs, rhs, tol, lhs <= rhs + tol});
  };
  add("EYi", eY, k.C_Y * (1.0 + eX), z(sY, std::pow(k.C_Y * sX, 2) + std::pow(k.C_Y_se * (1.0 + eX), 2)));
  add("EXi", eX, k.C_X * (1.0 + e0) + k.eps_X * eY, z(sX, std::pow(k.C_X * s0, 2) + std::pow(k.eps_X * sY, 2)));
  add("EY0", e0, k.C_0 + k.eps_0 * (eY + eX), z(s0, std::pow(k.eps_0, 2) * (sY * sY + sX * sX)));
  add("eps_X <= 1/(2 C_Y)", k.eps_X, 0.5 / k.C_Y, 0.0);
  add("eps_0 <= 1/(8 C_Y C_X)", k.eps_0, 0.125 / (k.C_Y * k.C_X), 0.0);
  r.e_T = std::max({eY, eX, e0});
  double se_T = eY >= eX && eY >= e0 ? sY : (eX >= e0 ? sX : s0);
  add("e_T <= 12 C_Y C_X C_0", r.e_T, 12.0 * k.C_Y * k.C_X * k.C_0, 1.96 * se_T);
  return r;
}

double psi_d(double y, double r_D, double c_Y) { return -0.5 / y + 0.5 * r_D * y - c_Y * y * y * y; }

namespace {

constexpr double kYAbs = 1e-4;

// Returns (time, y) at the first of: y <= y_stop, extinction (y <= kYAbs), or t_end.
std::pair<double, double> run_yd(double y, double r_D, double c_Y, double t_end, double y_stop, double dt,
                                 RngStream& g) {
  std::normal_distribution<double> normal;
  double t = 0.0;
  if (y <= y_stop) return {0.0, y};
  while (t < t_end) {
    double p = psi_d(y, r_D, c_Y);
    double h = std::min(dt, t_end - t);
    if (std::abs(p) * h > 0.25 * y) h = 0.25 * y / std::abs(p);
    y += p * h + std::sqrt(h) * normal(g);
    t += h;
    if (y <= kYAbs) return {t, 0.0};
    if (y <= y_stop) return {t, y};
  }
  return {t_end, y};
}

}  // namespace

std::vector<DescentRow> ydp_descent_check(double r_D, double c_Y, double t_D, double y_inf,
                                          const std::vector<double>& y_grid, std::size_t n_paths,
                                          std::uint64_t seed, double dt) {
  if (!(c_Y > 0.0)) throw InvalidArgument("c_Y must be positive");
  std::vector<DescentRow> rows;
  for (std::size_t s = 0; s < y_grid.size(); ++s) {
    std::vector<char> fail(n_paths, 0);
    auto np = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) {
      RngStream g(seed, s * kStartStride + static_cast<std::uint64_t>(i));
      auto [t, y] = run_yd(y_grid[s], r_D, c_Y, t_D, y_inf, dt, g);
      fail[static_cast<std::size_t>(i)] = t >= t_D && y > y_inf;
    }
    double p = static_cast<double>(std::count(fail.begin(), fail.end(), 1)) / static_cast<double>(n_paths);
    rows.push_back({y_grid[s], p, std::sqrt(p * (1 - p) / static_cast<double>(n_paths))});
  }
  return rows;
}

std::vector<DescentRow> ydp_extinction_sweep(const std::vector<double>& r_grid, double c_Y, double t_D, double y0,
                                             std::size_t n_paths, std::uint64_t seed, double dt) {
  std::vector<DescentRow> rows;
  for (std::size_t s = 0; s < r_grid.size(); ++s) {
    std::vector<char> alive(n_paths, 0);
    auto np = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < np; ++i) {
      RngStream g(seed, s * kStartStride + static_cast<std::uint64_t>(i));
      auto [t, y] = run_yd(y0, r_grid[s], c_Y, t_D, 0.0, dt, g);
      alive[static_cast<std::size_t>(i)] = y > 0.0;
    }
    double p = static_cast<double>(std::count(alive.begin(), alive.end(), 1)) / static_cast<double>(n_paths);
    rows.push_back({r_grid[s], p, std::sqrt(p * (1 - p) / static_cast<double>(n_paths))});
  }
  return rows;
}

}  // namespace qsd
