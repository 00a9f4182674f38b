#include <random>

#include "doctest.h"
#include "qsd/mc/rng.hpp"

using namespace qsd;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  auto a = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
  CHECK(a == Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto b = Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b == Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto c = Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c == Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 10; ++i) {
    auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
  RngStream g(1, 0);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = uniform_open(g);
    CHECK_FALSE((u <= 0.0 || u >= 1.0));
    s += u;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
  std::normal_distribution<double> nd;
  double m = 0.0;
  for (int i = 0; i < n; ++i) m += nd(g);
  CHECK(std::abs(m / n) < 0.01);
}
