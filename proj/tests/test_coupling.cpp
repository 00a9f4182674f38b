#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "qsd/coupling.hpp"
#include "qsd/errors.hpp"

using namespace qsd;

namespace {

CouplingConstants simple_constants(std::size_t n, double t_ps, double t_db, double c_bar) {
  CouplingConstants k;
  k.t_ps = t_ps;
  k.t_db = t_db;
  k.c_ps = 1.0;
  k.c_db = c_bar;
  k.t_xt = 0.0;
  k.alpha_c = ProbabilityVector::uniform(n);
  return k;
}

}  // namespace

TEST_CASE("horizon steps") {
  auto k = simple_constants(2, 1.0, 2.0, 0.25);
  CHECK(horizon_steps(10.0, k) == 4);
  CHECK(horizon_steps(3.0, k) == 1);
  CHECK(horizon_steps(2.0, k) == 0);
  CHECK_THROWS_AS(horizon_steps(1.0, k), HorizonTooShort);
  CHECK_THROWS_AS(horizon_steps(0.5, k), HorizonTooShort);
}

TEST_CASE("minorizing measure mass and alpha collapse") {
  auto g = golden_chain();
  auto ep = solve_eigentriple(g, 1e-15);
  auto k = simple_constants(2, 1.0, 2.0, 0.25);
  k.alpha_c = ep.alpha;
  auto m = minorizing_measure(g, k, 9.5);
  CHECK(m.mass() == doctest::Approx(0.68359375).epsilon(1e-13));
  for (std::size_t x = 0; x < 2; ++x) CHECK(std::abs(m[x] - 0.68359375 * ep.alpha[x]) < 1e-12);
  auto zero = minorizing_measure(g, k, 2.5);
  CHECK(zero.mass() == 0.0);
}

TEST_CASE("coupling mass indicator and cancellation") {
  auto g = golden_chain();
  auto k = golden_constants();
  CouplingEngine eng(g, k);
  auto mu = ProbabilityVector::delta(2, 1);
  double th = k.t_ps + 4.0 * k.t_db;
  CHECK(eng.coupling_mass(mu, 1, th, th) == doctest::Approx(k.c_bar()).epsilon(1e-12));
  CHECK(eng.coupling_mass(mu, 5, th, th) == 0.0);
  CHECK(eng.coupling_mass(mu, 3, 2.0 * k.t_db, th) == 0.0);
  CHECK(eng.coupling_mass(mu, 0, th, th) == 0.0);
}

TEST_CASE("coupling from the QSD keeps nu fixed") {
  auto g = golden_chain();
  auto ep = solve_eigentriple(g, 1e-15);
  auto k = golden_constants();
  k.alpha_c = ep.alpha;
  CouplingEngine eng(g, k);
  double th = k.t_ps + 6.0 * k.t_db;
  auto s = eng.start(ep.alpha, th);
  CHECK(s.r == 1.0);
  CHECK(eng.residual_identity(s, ep.alpha) == 0.0);
  while (s.j < s.J) {
    s = eng.advance(s, ep.alpha);
    CHECK(s.c_last == doctest::Approx(k.c_bar()).epsilon(1e-9));
    CHECK(std::abs(s.r - std::pow(1.0 - k.c_bar(), static_cast<double>(s.j))) < 1e-10);
    CHECK(tv_distance(s.nu, ep.alpha) < 1e-10);
  }
}

TEST_CASE("golden chain induction from every Dirac and several horizons") {
  auto g = golden_chain();
  auto k = golden_constants();
  CouplingEngine eng(g, k);
  for (std::size_t x = 0; x < 2; ++x) {
    for (double extra : {0.0, 1.5, 4.0, 9.0}) {
      double th = k.t_ps + k.t_db + extra;
      auto mu = ProbabilityVector::delta(2, x);
      auto run = eng.run(mu, th);
      REQUIRE_MESSAGE(run.completed, run.failure.value_or(""));
      CHECK(run.final_state.j == eng.horizon_steps(th));
      for (const auto& row : run.trace) {
        CHECK(row.r > 0.0);
        CHECK(row.min_nu >= 0.0);
        CHECK(row.ser < 1e-10);
        CHECK(row.identity < 1e-10);
        CHECK(row.mass_sum < 1e-10);
        if (!std::isnan(row.c)) {
          CHECK(row.c > 0.0);
          CHECK(row.c <= k.c_db * (1 + 1e-12));
        }
      }
      CHECK(run.domination_slack >= -1e-12);
    }
  }
}

TEST_CASE("BD chain induction and lower bound") {
  std::size_t n = 20;
  auto g = small_bdc(n, 4, 1.0, 1.0, 5.0);
  auto exh = bdc_exhaustion(n, 4);
  auto ep = solve_eigentriple(g);
  auto cs = certify(g, exh, ep, 1.0);
  REQUIRE(cs.all_hold());
  auto k = derive_coupling_constants(g, exh, cs, ep);
  CouplingEngine eng(g, k);
  for (std::size_t x : {0ul, 5ul, 19ul}) {
    auto run = eng.run(ProbabilityVector::delta(n, x), k.t_ps + 5.0 * k.t_db);
    REQUIRE_MESSAGE(run.completed, run.failure.value_or(""));
    for (const auto& row : run.trace) CHECK(row.ser < 1e-10);
    CHECK(run.domination_slack >= -1e-12);
  }
  std::vector<ProbabilityVector> mus{ProbabilityVector::delta(n, 0), ProbabilityVector::delta(n, n - 1),
                                     ProbabilityVector::uniform(n)};
  double t1 = k.t_ps + 2.0 * k.t_db;
  auto checks = eng.verify_lower_bound(mus, {{t1, t1}, {t1, 2.0 * t1}, {2.0 * t1, 3.0 * t1}});
  for (const auto& c : checks) {
    CHECK(c.ok);
    CHECK(c.tv <= c.tv_bound);
  }
}

TEST_CASE("induction breaks with inflated constants") {
  auto g = golden_chain();
  auto k = golden_constants();
  k.c_db = std::min(0.999 * k.c_ps, 50.0 * k.c_db);
  CouplingEngine eng(g, k);
  auto run = eng.run(ProbabilityVector::delta(2, 1), k.t_ps + 6.0 * k.t_db);
  CHECK_FALSE(run.completed);
  REQUIRE(run.failure.has_value());
  CHECK(!run.trace.empty());
}

TEST_CASE("Q-process lower bound") {
  auto g = golden_chain();
  auto k = golden_constants();
  CouplingEngine eng(g, k);
  double th = k.t_ps + 3.0 * k.t_db + 0.3;
  std::size_t J = eng.horizon_steps(th);
  for (std::size_t x = 0; x < 2; ++x)
    for (double t_ev : {static_cast<double>(J) * k.t_db + k.t_ps, th})
      CHECK(eng.glb_slack(ProbabilityVector::delta(2, x), t_ev, th) >= -1e-12);
}
