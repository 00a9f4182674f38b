#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qsd/errors.hpp"
#include "qsd/models/nonuniformity.hpp"

using namespace qsd;

namespace {

// Birth-death chain b_k = b k, d_k = d k on (lo, hi), leaving it goes to a cemetery.
oracle::RawGenerator band_oracle(double b, double d, std::size_t lo, std::size_t hi) {
  oracle::RawGenerator g;
  std::size_t m = hi - lo - 1;
  g.n = m + 1;
  g.kill.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double k = static_cast<double>(lo + 1 + i);
    g.rates.emplace_back(i, i + 1 < m ? i + 1 : m, b * k);
    g.rates.emplace_back(i, i > 0 ? i - 1 : m, d * k);
  }
  return g;
}

// The Malthusian chain written out directly, killed above n_max.
oracle::RawGenerator bdnu_oracle(const BDNUParams& p) {
  oracle::RawGenerator g;
  g.n = p.n_max;
  g.kill.assign(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    double k = static_cast<double>(i + 1);
    double b = i == 0 ? p.b1 : p.b_bar * k;
    double d = i == 0 ? 0.0 : p.d_bar * k;
    g.kill[i] = i == 0 ? p.c1 : p.c2;
    if (i + 1 < g.n) g.rates.emplace_back(i, i + 1, b);
    else g.kill[i] += b;
    if (d > 0.0) g.rates.emplace_back(i, i - 1, d);
  }
  return g;
}

}  // namespace

TEST_CASE("band exit probability against a dense exponential") {
  BDNUParams p;
  for (int n : {1, 2, 3, 4}) {
    std::size_t lo = std::size_t{1} << (n - 1), hi = std::size_t{1} << (n + 1);
    auto q = oracle::dense(band_oracle(p.b_bar, p.d_bar, lo, hi));
    double t = bdnu_escape_time(p);
    auto e = oracle::expm_taylor(q, t);
    double exact = e((std::size_t{1} << n) - lo - 1, hi - lo - 1);
    double got = band_exit_probability(p, n, t);
    CHECK(std::abs(got - exact) <= 1e-9 * exact + 1e-15);
  }
}

TEST_CASE("band exit probability keeps relative accuracy when tiny") {
  BDNUParams p;
  std::size_t lo = 16, hi = 64;
  auto q = oracle::dense(band_oracle(p.b_bar, p.d_bar, lo, hi));
  auto e = oracle::expm_taylor(q, bdnu_escape_time(p));
  double got = band_exit_probability(p, 5, bdnu_escape_time(p));
  CHECK(got > 0.0);
  CHECK(got < 1e-6);
  CHECK(std::abs(got - e(31 - lo, hi - lo - 1)) <= 1e-6 * got);
  CHECK_THROWS_AS(band_exit_probability(p, 0, 0.1), InvalidArgument);
}

TEST_CASE("nonuniformity on a small truncation") {
  BDNUParams p;
  p.n_max = 256;
  double t = 0.5;
  auto rep = nonuniformity_experiment(p, t, 0.1, {1, 2, 4, 8, 16, 32, 64}, {1, 2, 3, 4, 5, 6});
  auto e = oracle::expm_taylor(oracle::dense(bdnu_oracle(p)), t);
  auto law = [&](std::size_t x) -> Eigen::VectorXd {
    Eigen::VectorXd r = e.row(x - 1).transpose();
    return r / r.sum();
  };
  auto ref = law(1);
  for (auto& h : rep.heights) {
    double tv = 0.5 * (law(h.height) - ref).cwiseAbs().sum();
    CHECK(std::abs(h.tv - tv) < 1e-8);
  }
  CHECK(rep.heights[0].tv == 0.0);
  REQUIRE(rep.witness);
  CHECK(rep.heights.size() == 7);
  CHECK(rep.decreasing);
  CHECK(rep.within_bound);
  for (auto& l : rep.levels) CHECK(l.bound == doctest::Approx(l.doob_bound));
}

TEST_CASE("nonuniformity stops at the witness and flags a short truncation") {
  BDNUParams p;
  p.n_max = 64;
  NonuniformityOptions o;
  o.stop_at_witness = true;
  auto rep = nonuniformity_experiment(p, 0.05, 0.1, {1, 60, 62}, {}, o);
  REQUIRE(rep.witness);
  CHECK(*rep.witness == 60);
  CHECK(rep.heights.size() == 2);
  CHECK_FALSE(rep.warnings.empty());
  CHECK_THROWS_AS(nonuniformity_experiment(p, 1.0, 1.5, {1}, {}), InvalidArgument);
  CHECK_THROWS_AS(nonuniformity_experiment(p, 1.0, 0.1, {65}, {}), InvalidArgument);
  CHECK_THROWS_AS(nonuniformity_experiment(p, 1.0, 0.1, {1}, {6}), InvalidArgument);
}

TEST_CASE("escape bounds differ when the drift is weak") {
  BDNUParams p;
  p.b_bar = 1.25;
  p.d_bar = 1.0;
  p.c2 = 3.0;
  CHECK(bdnu_escape_time(p) == 0.5);
  CHECK(bdnu_escape_bound(p, 3) == doctest::Approx(4.0 * 2.25 / 8.0));
  CHECK(bdnu_doob_bound(p, 3) == doctest::Approx(32.0 * 2.25 * 0.5 / 8.0));
}
