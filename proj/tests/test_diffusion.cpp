#include <cmath>

#include "doctest.h"
#include "qsd/errors.hpp"
#include "qsd/models/csbp.hpp"
#include "qsd/models/diffusion.hpp"

using namespace qsd;

namespace {

// Riccati solution for r = 0, solved by hand.
double riccati_critical(double sigma, double t, double lambda) { return lambda / (1.0 + 0.5 * sigma * sigma * lambda * t); }

// Riccati solution for r != 0: 1/u is linear in exp(-r t).
double riccati(double r, double sigma, double t, double lambda) {
  double k = 0.5 * sigma * sigma / r;
  double e = std::exp(-r * t);
  return 1.0 / (e / lambda + k * (1.0 - e));
}

}  // namespace

TEST_CASE("csbp: critical closed form") {
  for (double lam : {0.1, 1.0, 10.0, 1e4})
    for (double t : {0.01, 0.5, 3.0}) {
      double u = csbp_laplace(0.0, 1.3, t, lam);
      CHECK(std::abs(u - riccati_critical(1.3, t, lam)) <= 1e-9 * u);
    }
  auto lim = csbp_u_inf(0.0, 1.3, 0.7);
  double exact = 2.0 / (1.3 * 1.3 * 0.7);
  CHECK(std::abs(lim.u_inf - exact) < 1e-6 * exact);
  CHECK(std::abs(csbp_extinction(2.0, 0.0, 1.3, 0.7) - std::exp(-2.0 * exact)) < 1e-7);
}

TEST_CASE("csbp: supercritical and subcritical closed form") {
  for (double r : {-1.5, 0.8, 2.0})
    for (double lam : {0.5, 50.0}) {
      double u = csbp_laplace(r, 0.9, 1.2, lam);
      double e = riccati(r, 0.9, 1.2, lam);
      CHECK(std::abs(u - e) <= 1e-9 * e);
    }
}

TEST_CASE("csbp: semigroup law and concavity") {
  double r = 0.7, s = 0.9;
  for (double lam : {0.3, 4.0, 200.0}) {
    double a = csbp_laplace(r, s, 0.4 + 0.6, lam);
    double b = csbp_laplace(r, s, 0.4, csbp_laplace(r, s, 0.6, lam));
    CHECK(std::abs(a - b) <= 1e-9 * a);
  }
  double prev = 0.0, slope = INFINITY;
  for (double lam = 0.5; lam < 40.0; lam += 0.5) {
    double u = csbp_laplace(r, s, 1.0, lam);
    CHECK(u > prev);
    double sl = (u - prev) / 0.5;
    CHECK(sl <= slope + 1e-9);
    slope = sl;
    prev = u;
  }
}

TEST_CASE("csbp: extinction limits in z0") {
  CHECK(csbp_extinction(1e-9, 0.5, 1.0, 1.0) > 1.0 - 1e-8);
  CHECK(csbp_extinction(1e4, 0.5, 1.0, 1.0) < 1e-100);
  CHECK_THROWS(csbp_laplace(0.5, 0.0, 1.0, 1.0));
}

TEST_CASE("feller extinction matches the critical formula") {
  double z0 = 0.5, sigma = 1.0, t = 1.0;
  auto est = feller_extinction_mc(z0, 0.0, sigma, t, 1e-3, 20000, 21);
  double exact = std::exp(-2.0 * z0 / (sigma * sigma * t));
  CHECK(std::abs(est.p - exact) < 3.0 * est.stderr_ + 0.005);
}

TEST_CASE("feller extinction matches the csbp solver off criticality") {
  double z0 = 0.4, r = 0.8, sigma = 1.2, t = 1.5;
  auto est = feller_extinction_mc(z0, r, sigma, t, 1e-3, 20000, 23);
  double exact = csbp_extinction(z0, r, sigma, t);
  CHECK(std::abs(est.p - exact) < 3.0 * est.stderr_ + 0.005);
}

TEST_CASE("feller extinction is insensitive to the absorption threshold") {
  DiffusionSpec f = feller(0.0, 1.0);
  double p[2];
  int i = 0;
  for (double eps : {1e-6, 1e-8}) {
    DiffusionOptions o;
    o.eps_abs = eps;
    int dead = 0;
    const int n = 4000;
    for (int k = 0; k < n; ++k) {
      RngStream g(31, static_cast<std::uint64_t>(k));
      auto path = simulate_diffusion(f, {0.0}, 0.5, 1e-3, 1.0, g, o);
      dead += path.extinction_time ? 1 : 0;
    }
    p[i++] = static_cast<double>(dead) / n;
  }
  CHECK(std::abs(p[0] - p[1]) < 0.03);
}

TEST_CASE("deterministic logistic limit") {
  QuadraticWellParams q;
  q.sigma_N = 0.0;
  q.sigma_X = 0.0;
  q.theta = 0.0;
  q.r0 = 2.0;
  q.a = 0.5;
  q.c = 0.8;
  auto spec = quadratic_well(q);
  RngStream g(1, 0);
  auto path = simulate_diffusion(spec, {1.0}, 0.05, 1e-3, 30.0, g);
  CHECK_FALSE(path.extinction_time);
  double target = (2.0 - 0.5) / 0.8;
  CHECK(std::abs(path.n.back() - target) < 1e-6 * target);
  CHECK(std::abs(path.x.back()[0] - 1.0) < 1e-15);
}

TEST_CASE("monotone coupling in the initial population") {
  QuadraticWellParams q;
  q.sigma_X = 0.0;
  auto spec = quadratic_well(q);
  DiffusionOptions o;
  o.adaptive = false;
  int violations = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    RngStream g1(5, k), g2(5, k);
    DiffusionStepper lo(spec, {0.3}, 0.2, g1, o), hi(spec, {0.3}, 0.6, g2, o);
    for (int s = 0; s < 2000; ++s) {
      bool a = lo.step(1e-3);
      bool b = hi.step(1e-3);
      if (b && !a) ++violations;
      if (!a && !b && hi.n() < lo.n()) ++violations;
      if (a || b) break;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("catastrophes kill at the prescribed rate") {
  QuadraticWellParams q;
  q.rho0 = 2.0;
  q.sigma_N = 0.0;
  auto spec = quadratic_well(q);
  const int n = 20000;
  int dead = 0;
  for (int k = 0; k < n; ++k) {
    RngStream g(9, static_cast<std::uint64_t>(k));
    auto path = simulate_diffusion(spec, {0.0}, 1.0, 1e-2, 0.5, g);
    if (path.absorption == Absorption::Catastrophe) ++dead;
  }
  double p = static_cast<double>(dead) / n, exact = 1.0 - std::exp(-1.0);
  CHECK(std::abs(p - exact) < 3.0 * std::sqrt(exact * (1 - exact) / n));
}

TEST_CASE("region partition") {
  TransitoryDecomposition d{2.0, 4.0, 1.0};
  auto n_of = [&](double y) { return to_n(y, 1.0); };
  CHECK(d.classify(std::vector<double>{0.0}, n_of(1.0)) == Region::DeltaC);
  CHECK(d.classify(std::vector<double>{0.0}, n_of(0.1)) == Region::T0);
  CHECK(d.classify(std::vector<double>{0.0}, n_of(5.0)) == Region::TY);
  CHECK(d.classify(std::vector<double>{5.0}, n_of(3.0)) == Region::TY);
  CHECK(d.classify(std::vector<double>{5.0}, n_of(1.0)) == Region::TX);
  CHECK(d.classify(std::vector<double>{5.0}, 0.0) == Region::TX);
  for (Region r : {Region::DeltaC, Region::TY, Region::T0, Region::TX})
    for (auto& [x, n] : d.start_grid(r, 1)) CHECK(d.classify(x, n) == r);
  CHECK_THROWS((TransitoryDecomposition{5.0, 4.0, 1.0}.validate()));
}

TEST_CASE("escape moment from inside the core is one") {
  auto spec = quadratic_well({});
  TransitoryDecomposition d{3.0, 4.0, 1.0};
  auto e = escape_moment_mc(spec, d, 1.0, Region::DeltaC, 50, 3);
  CHECK(e.sup == doctest::Approx(1.0));
}

TEST_CASE("escape report on a quadratic well") {
  QuadraticWellParams q;
  q.a = 0.02;
  q.sigma_X = 1.5;
  auto spec = quadratic_well(q);
  TransitoryDecomposition d{3.0, 4.0, 1.0};
  auto rep = escape_report(spec, d, 1.0, 400, 17);
  CHECK(rep.k.p_X > 0.0);
  CHECK(rep.k.p_Y > 0.0);
  CHECK(rep.k.C_X > 2.0);
  CHECK(rep.E_Y.sup >= 1.0);
  CHECK(rep.E_X.sup >= 1.0);
  CHECK(rep.E_0.sup >= 1.0);
  for (auto& c : rep.checks) {
    INFO(c.name, " ", c.lhs, " <= ", c.rhs, " + ", c.tolerance);
    CHECK(c.holds);
  }
  CHECK(rep.all_hold());
}

TEST_CASE("escape report is reproducible") {
  auto spec = quadratic_well({});
  TransitoryDecomposition d{3.0, 4.0, 1.0};
  auto a = escape_moment_mc(spec, d, 1.0, Region::TY, 100, 8);
  auto b = escape_moment_mc(spec, d, 1.0, Region::TY, 100, 8);
  CHECK(a.sup == b.sup);
}

TEST_CASE("descent from infinity") {
  double c_Y = 1.0 / 8.0;
  auto rows = ydp_descent_check(1.0, c_Y, 0.5, 6.0, {3.0, 10.0, 100.0, 1000.0}, 2000, 4);
  CHECK(rows[0].p == 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].p < 0.05);
  CHECK(std::abs(rows[3].p - rows[2].p) < 0.03);
  auto sweep = ydp_extinction_sweep({0.0, -4.0, -16.0, -64.0}, c_Y, 0.5, 2.0, 2000, 6);
  for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(sweep[i].p <= sweep[i - 1].p + 3.0 * sweep[i].stderr_);
  CHECK(sweep.back().p < 0.05);
  CHECK_THROWS(ydp_descent_check(1.0, 0.0, 0.5, 6.0, {3.0}, 10, 1));
}
