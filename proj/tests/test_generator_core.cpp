#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "qsd/eigen.hpp"
#include "qsd/errors.hpp"
#include "qsd/profile.hpp"
#include "qsd/semigroup.hpp"

using namespace qsd;

TEST_CASE("generator construction and validation") {
  auto g = golden_chain();
  CHECK(g.size() == 2);
  CHECK(g.diag(0) == -2.0);
  CHECK(g.diag(1) == -1.0);
  CHECK(g.rate(0, 1) == 1.0);
  CHECK_THROWS_AS(SubMarkovGenerator(2, {{0, 0, 1.0}}, {0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(SubMarkovGenerator(2, {{0, 1, -1.0}}, {0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(SubMarkovGenerator(2, {{0, 2, 1.0}}, {0.0, 0.0}), DimensionMismatch);
  CHECK_THROWS_AS(SubMarkovGenerator(2, {}, {0.0}), DimensionMismatch);
  SubMarkovGenerator dup(2, {{0, 1, 1.0}, {0, 1, 0.5}}, {0.0, 0.0});
  CHECK(dup.rate(0, 1) == 1.5);
  CHECK(dup.nnz() == 1);
}

TEST_CASE("restriction turns exits into kill") {
  SubMarkovGenerator g(3, {{0, 1, 1.0}, {1, 2, 2.0}, {1, 0, 0.5}, {2, 1, 3.0}}, {0.1, 0.0, 0.0});
  std::vector<std::size_t> keep{0, 1};
  auto r = g.restrict_to(keep);
  CHECK(r.size() == 2);
  CHECK(r.kill(1) == doctest::Approx(2.0));
  CHECK(r.exit_rate(1) == doctest::Approx(2.5));
}

TEST_CASE("tv distance") {
  auto a = ProbabilityVector::delta(2, 0);
  auto b = ProbabilityVector::delta(2, 1);
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == 1.0);
  CHECK(tv_distance(ProbabilityVector({0.5, 0.5}), ProbabilityVector({0.8, 0.2})) == doctest::Approx(0.3));
}

TEST_CASE("Poisson window") {
  for (double a : {0.0, 1e-3, 0.7, 5.0, 80.0, 3000.0, 250000.0}) {
    auto pw = poisson_window(a, 1e-12);
    double s = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < pw.weights.size(); ++i) {
      s += pw.weights[i];
      mean += pw.weights[i] * static_cast<double>(pw.left + i);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(mean == doctest::Approx(a).epsilon(1e-9));
  }
  auto pw = poisson_window(4.0, 1e-12);
  // Direct pmf at k = 3.
  double p3 = std::exp(-4.0) * 64.0 / 6.0;
  CHECK(pw.weights[3 - pw.left] == doctest::Approx(p3).epsilon(1e-12));
}

TEST_CASE("semigroup_apply basic cases") {
  auto g = golden_chain();
  auto mu = ProbabilityVector({0.3, 0.7});
  CHECK(semigroup_apply(g, mu, 0.0).weights() == mu.weights());
  SubMarkovGenerator death(1, {}, {0.7});
  for (double t : {0.1, 1.0, 10.0, 50.0}) {
    auto r = semigroup_apply(death, ProbabilityVector::delta(1, 0), t);
    CHECK(r.mass() == doctest::Approx(std::exp(-0.7 * t)).epsilon(1e-12));
  }
  oracle::RawGenerator raw{2, {{0, 1, 1.0}, {1, 0, 1.0}}, {1.0, 0.0}};
  Eigen::MatrixXd p = oracle::expm_taylor(oracle::dense(raw), 1.0);
  auto r = semigroup_apply(g, ProbabilityVector::delta(2, 0), 1.0);
  CHECK(r.mass() == doctest::Approx(p.row(0).sum()).epsilon(1e-12));
  CHECK_THROWS_AS(semigroup_apply(g, mu, std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(semigroup_apply(g, mu, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(semigroup_apply(g, ProbabilityVector::delta(3, 0), 1.0), DimensionMismatch);
}

TEST_CASE("uniformization matches the dense oracle on random generators") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int rep = 0; rep < 60; ++rep) {
    std::size_t n = 1 + rep % 8;
    auto raw = oracle::random_generator(rng, n);
    auto g = to_generator(raw);
    Eigen::MatrixXd q = oracle::dense(raw);
    std::vector<double> w(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double s = 0.0;
    for (auto& x : w) s += (x = u(rng));
    for (auto& x : w) x /= s;
    ProbabilityVector mu(w);
    for (double t : {0.1, 1.0, 10.0}) {
      Eigen::RowVectorXd ref = Eigen::Map<Eigen::RowVectorXd>(w.data(), n) * oracle::expm_taylor(q, t);
      auto r = semigroup_apply(g, mu, t);
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += std::abs(r[i] - ref(i));
      worst = std::max(worst, d);
      // Right action against the same oracle.
      Vector f = survival_function(g, t);
      Eigen::VectorXd fr = oracle::expm_taylor(q, t) * Eigen::VectorXd::Ones(n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(f[i] - fr(i)) < 1e-10);
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("semigroup law, mass monotonicity and DCNE flow") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = to_generator(oracle::random_generator(rng, 2 + rep % 6));
    auto mu = ProbabilityVector::uniform(g.size());
    double s = 0.37 + rep * 0.1, t = 1.3;
    auto a = semigroup_apply(g, mu, s + t);
    auto b = semigroup_apply(g, semigroup_apply(g, mu, s), t);
    CHECK(l1_distance(a.span(), b.span()) < 1e-11);
    auto da = dcne(g, mu, s + t);
    auto db = dcne(g, dcne(g, mu, s), t);
    CHECK(l1_distance(da.span(), db.span()) < 1e-11);
    double prev = 1.0;
    for (double u : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      double m = survival_probability(g, mu, u);
      CHECK(m <= prev + 1e-15);
      prev = m;
    }
  }
}

TEST_CASE("conservative chains keep unit mass") {
  SubMarkovGenerator g(3, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 0, 0.5}}, {0.0, 0.0, 0.0});
  auto mu = ProbabilityVector({0.2, 0.3, 0.5});
  for (double t : {0.5, 3.0, 20.0}) {
    auto a = semigroup_apply(g, mu, t);
    CHECK(a.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l1_distance(a.span(), dcne(g, mu, t).span()) < 1e-12);
  }
  SubMarkovGenerator single(1, {}, {0.0});
  CHECK(semigroup_apply(single, ProbabilityVector::delta(1, 0), 5.0).mass() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("log-scaled propagation far beyond the double range") {
  SubMarkovGenerator death(1, {}, {3.0});
  double ls = log_survival_probability(death, ProbabilityVector::delta(1, 0), 400.0);
  CHECK(ls == doctest::Approx(-1200.0).epsilon(1e-12));
  auto g = golden_chain();
  auto a = dcne(g, ProbabilityVector::delta(2, 0), 3000.0);
  CHECK(a[0] == doctest::Approx(oracle::golden_alpha[0]).epsilon(1e-9));
}

TEST_CASE("golden chain eigen-triple and dcne limit") {
  auto g = golden_chain();
  auto ep = solve_eigentriple(g);
  CHECK(std::abs(ep.lambda0 - oracle::golden_lambda0) < 1e-10);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(ep.alpha[i] - oracle::golden_alpha[i]) < 1e-10);
    CHECK(std::abs(ep.eta[i] - oracle::golden_eta[i]) < 1e-10);
  }
  CHECK(dot(ep.alpha.span(), ep.eta) == doctest::Approx(1.0).epsilon(1e-14));
  auto a = dcne(g, ProbabilityVector::delta(2, 0), 50.0);
  CHECK(std::abs(a[0] - 0.381966) < 1e-6);
  CHECK(std::abs(survival_capacity_t(g, 1, 40.0, ep.lambda0) - 1.1708204) < 1e-7);
  CHECK(std::abs(survival_capacity_t(g, 1, 40.0, ep.lambda0) - oracle::golden_eta[1]) < 1e-8);
  CHECK(survival_capacity_t(g, 0, 0.0, ep.lambda0) == 1.0);
  CHECK(ep.gap_estimate == doctest::Approx(std::sqrt(5.0)).epsilon(1e-3));
  auto b = ep.beta();
  CHECK(b[0] == doctest::Approx(0.2763932).epsilon(1e-6));
}

TEST_CASE("single state eigen-triple") {
  SubMarkovGenerator g(1, {}, {0.8});
  auto ep = solve_eigentriple(g);
  CHECK(ep.lambda0 == doctest::Approx(0.8));
  CHECK(ep.alpha[0] == 1.0);
  CHECK(ep.eta[0] == doctest::Approx(1.0));
  CHECK(survival_capacity_t(g, 0, 7.0, 0.8) == doctest::Approx(1.0));
}

TEST_CASE("eigen-triple against the dense oracle and invariants") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    auto raw = oracle::random_generator(rng, 2 + rep % 7);
    auto g = to_generator(raw);
    auto ep = solve_eigentriple(g);
    auto rates = oracle::sorted_decay_rates(oracle::dense(raw));
    CHECK(std::abs(ep.lambda0 - rates[0]) < 1e-9);
    CHECK(ep.residual_left < 1e-9);
    CHECK(ep.residual_right < 1e-9);
    for (double x : ep.eta) CHECK(x > 0.0);
    for (double t : {0.3, 2.0, 9.0}) {
      CHECK(tv_distance(dcne(g, ep.alpha, t), ep.alpha) < 1e-10);
      // e^{lambda0 t} <mu | P_t eta> = <mu | eta>
      Propagator prop(g);
      Vector pe = prop.apply(Side::Right, ep.eta, t);
      auto mu = ProbabilityVector::uniform(g.size());
      CHECK(std::exp(ep.lambda0 * t) * dot(mu.span(), pe) ==
            doctest::Approx(dot(mu.span(), ep.eta)).epsilon(1e-10));
    }
  }
}

TEST_CASE("reducible generators are refused") {
  SubMarkovGenerator g(2, {{0, 1, 1.0}}, {0.5, 0.2});
  CHECK_FALSE(is_irreducible(g));
  CHECK_THROWS_AS(solve_eigentriple(g), NotIrreducible);
  CHECK(strongly_connected_components(g).size() == 2);
  CHECK(perron_rate(g) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("convergence profile") {
  auto g = golden_chain();
  auto ep = solve_eigentriple(g, 1e-15);
  auto grid = linear_grid(1.0, 9.0, 81);
  auto prof = convergence_profile(g, ep, {ProbabilityVector::delta(2, 0), ep.alpha}, grid);
  CHECK(prof.tv_decay_rate(0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-3));
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(prof.rows[grid.size() + i].tv < 1e-11);
  SubMarkovGenerator single(1, {}, {0.4});
  auto eps = solve_eigentriple(single);
  auto p1 = convergence_profile(single, eps, {ProbabilityVector::delta(1, 0)}, grid);
  for (const auto& r : p1.rows) {
    CHECK(r.tv == 0.0);
    CHECK(r.eta_dev < 1e-10);
  }
}
