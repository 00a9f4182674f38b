#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "qsd/assumptions.hpp"
#include "qsd/errors.hpp"
#include "qsd/models/discretize.hpp"

using namespace qsd;

namespace {

DiffusionGrid small_grid() {
  DiffusionGrid g;
  g.x_lo = -2.0;
  g.x_hi = 2.0;
  g.x_cells = 17;
  g.n_step = 0.1;
  g.n_cells = 30;
  return g;
}

}  // namespace

TEST_CASE("discretized well is a sub-generator with the right rates") {
  auto spec = quadratic_well({});
  auto grid = small_grid();
  auto g = discretize_diffusion(spec, grid);
  CHECK(g.size() == 17 * 30);
  double hx = 0.25, hn = 0.1;
  // Interior cell x = 0.5, N = 1.0: drift of N is (1 - 0.25 - 1) * 1 = -0.25.
  std::size_t i = 10, j = 9;
  std::size_t s = grid.index(i, j);
  CHECK(grid.x(i) == doctest::Approx(0.5));
  CHECK(grid.n(j) == doctest::Approx(1.0));
  double vx = 0.5 * 0.25 / (hx * hx);
  CHECK(g.rate(s, grid.index(i - 1, j)) == doctest::Approx(vx + 0.5 / hx));
  CHECK(g.rate(s, grid.index(i + 1, j)) == doctest::Approx(vx));
  double vn = 0.5 * 1.0 / (hn * hn);
  CHECK(g.rate(s, grid.index(i, j - 1)) == doctest::Approx(vn + 0.25 / hn));
  CHECK(g.rate(s, grid.index(i, j + 1)) == doctest::Approx(vn));
  CHECK(g.kill(s) == 0.0);
  // Lowest population cell loses its downward move to extinction.
  std::size_t b = grid.index(i, 0);
  CHECK(g.kill(b) > 0.0);
  CHECK(g.rate(grid.index(0, 5), grid.index(1, 5)) > 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) CHECK(g.kill(x) >= 0.0);
}

TEST_CASE("catastrophes enter as killing") {
  QuadraticWellParams q;
  q.rho0 = 0.3;
  q.rho1 = 1.0;
  auto grid = small_grid();
  auto g0 = discretize_diffusion(quadratic_well({}), grid);
  auto g1 = discretize_diffusion(quadratic_well(q), grid);
  std::size_t s = grid.index(12, 9);
  CHECK(g1.kill(s) - g0.kill(s) == doctest::Approx(0.3 + grid.x(12) * grid.x(12)));
}

TEST_CASE("mixing and domination hold on the discretized well") {
  auto spec = quadratic_well({});
  auto grid = small_grid();
  auto g = discretize_diffusion(spec, grid);
  auto exh = diffusion_exhaustion(grid, {0.5, 1.0}, {{0.5, 1.2}, {0.2, 2.0}});
  CHECK(exh.count() == 3);
  auto ep = solve_eigentriple(g);
  CHECK(ep.lambda0 > 0.0);
  auto cs = certify(g, exh, ep, 1.0);
  CHECK(cs.mix.holds);
  CHECK(cs.dc.holds);
  CHECK(cs.sv.holds);
}

TEST_CASE("discretization rejects bad input") {
  auto grid = small_grid();
  grid.x_cells = 1;
  CHECK_THROWS_AS(discretize_diffusion(quadratic_well({}), grid), InvalidArgument);
  QuadraticWellParams q;
  q.dim = 2;
  CHECK_THROWS_AS(discretize_diffusion(quadratic_well(q), small_grid()), InvalidArgument);
  CHECK_THROWS_AS(diffusion_exhaustion(small_grid(), {0.5}, {}), InvalidArgument);
}
