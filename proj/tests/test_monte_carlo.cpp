#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "qsd/errors.hpp"
#include "qsd/mc/monte_carlo.hpp"
#include "qsd/semigroup.hpp"

using namespace qsd;

TEST_CASE("gillespie: exponential extinction time") {
  SubMarkovGenerator g(1, {}, {2.0});
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    RngStream r(7, static_cast<std::uint64_t>(i));
    auto p = gillespie(g, 0, 1e9, r);
    REQUIRE(p.extinction_time);
    s += *p.extinction_time;
    s2 += *p.extinction_time * *p.extinction_time;
  }
  double mean = s / n;
  double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 0.5) < 3.0 * se);
}

TEST_CASE("gillespie: golden chain survival") {
  auto g = golden_chain();
  double t = 1.5;
  double exact = survival_probability(g, ProbabilityVector::delta(2, 0), t);
  const int n = 200000;
  int alive = 0;
  for (int i = 0; i < n; ++i) {
    RngStream r(11, static_cast<std::uint64_t>(i));
    alive += gillespie(g, 0, t, r).extinction_time ? 0 : 1;
  }
  double p = static_cast<double>(alive) / n;
  CHECK(std::abs(p - exact) < 3.0 * std::sqrt(exact * (1 - exact) / n));
}

TEST_CASE("naive conditioning") {
  auto g = golden_chain();
  auto mu = ProbabilityVector::delta(2, 0);
  auto e0 = estimate_dcne_naive(g, ProbabilityVector({0.3, 0.7}), 0.0, 100000, 3);
  CHECK(e0.ess == 100000);
  CHECK(std::abs(e0.estimate[0] - 0.3) < 0.006);
  auto e = estimate_dcne_naive(g, mu, 3.0, 200000, 5);
  auto exact = dcne(g, mu, 3.0);
  CHECK(tv_distance(e.estimate, exact) < 2.0 / std::sqrt(static_cast<double>(e.ess)));
  CHECK_THROWS_AS(estimate_dcne_naive(g, mu, 200.0, 10, 5), AllExtinct);
}

TEST_CASE("naive conditioning on a BD chain stays within 4/sqrt(ESS)") {
  auto g = small_bdc(10, 3);
  auto mu = ProbabilityVector::delta(10, 4);
  auto exact = dcne(g, mu, 2.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto e = estimate_dcne_naive(g, mu, 2.0, 20000, seed);
    ok += tv_distance(e.estimate, exact) < 4.0 / std::sqrt(static_cast<double>(e.ess));
  }
  CHECK(ok >= 19);
}

TEST_CASE("Fleming-Viot without killing is independent motion") {
  SubMarkovGenerator g(2, {{0, 1, 1.0}, {1, 0, 2.0}}, {0.0, 0.0});
  auto mu = ProbabilityVector::delta(2, 0);
  auto fv = fleming_viot(g, mu, 2.0, 500, 9);
  CHECK(fv.resample_log == 0);
  JumpSampler s(g);
  for (std::size_t i = 0; i < 500; ++i) {
    RngStream r(9, i);
    sample_index(r, mu);
    CHECK(fv.positions[i] == s.state_at(0, 2.0, r));
  }
}

TEST_CASE("Fleming-Viot on the golden chain") {
  auto g = golden_chain();
  auto ep = solve_eigentriple(g);
  auto fv = fleming_viot(g, ProbabilityVector::delta(2, 1), 20.0, 10000, 21);
  CHECK(tv_distance(fv.empirical(2), ep.alpha) < 0.05);
  double lam = fv.absorption_rate(10.0);
  CHECK(std::abs(lam / ep.lambda0 - 1.0) < 0.05);
  for (auto x : fv.positions) CHECK(x < 2);
}

TEST_CASE("Fleming-Viot is reproducible and thread independent") {
  auto g = small_bdc(12, 4);
  auto mu = ProbabilityVector::uniform(12);
  auto a = fleming_viot(g, mu, 3.0, 2000, 4);
  auto b = fleming_viot(g, mu, 3.0, 2000, 4);
  CHECK(a.positions == b.positions);
  CHECK(a.resample_times == b.resample_times);
}

TEST_CASE("Q-process algebra") {
  std::mt19937_64 eng(17);
  for (int k = 0; k < 10; ++k) {
    auto raw = oracle::random_generator(eng, 3 + k % 5);
    auto g = to_generator(raw);
    auto ep = solve_eigentriple(g, 1e-14);
    CHECK(qprocess_row_sum_defect(g, ep) < 1e-10);
    auto q = qprocess_generator(g, ep);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(q.kill(i) == 0.0);
    for (double t : {0.5, 3.0}) {
      CHECK(qprocess_kernel_defect(g, ep, t) < 1e-9);
      CHECK(eta_transform_defect(g, ep, ProbabilityVector::delta(g.size(), 0), t) < 1e-9);
    }
  }
}

TEST_CASE("Q-process with constant killing drops the killing") {
  SubMarkovGenerator g(3, {{0, 1, 1.0}, {1, 2, 0.5}, {2, 0, 2.0}}, {0.3, 0.3, 0.3});
  auto ep = solve_eigentriple(g, 1e-14);
  auto q = qprocess_generator(g, ep);
  for (const auto& t : g.transitions()) CHECK(q.rate(t.from, t.to) == doctest::Approx(t.rate).epsilon(1e-10));
}

TEST_CASE("Q-process occupation approaches beta") {
  auto g = golden_chain();
  auto ep = solve_eigentriple(g);
  auto beta = ep.beta();
  CHECK(beta[0] == doctest::Approx(0.2763932).epsilon(1e-6));
  RngStream r(1, 0);
  auto run = qprocess_occupation(g, ep, 0, 1000000, 1000, r);
  CHECK(tv_distance(run.occupation, beta.span()) < 0.02);
}
