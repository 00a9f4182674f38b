#include "qsd/models/discretize.hpp"

#include <algorithm>
#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

void DiffusionGrid::validate() const {
  if (!(x_hi > x_lo) || x_cells < 2) throw InvalidArgument("trait window needs x_hi > x_lo and two cells");
  if (!(n_step > 0.0) || n_cells < 2) throw InvalidArgument("population grid needs a positive step and two cells");
}

double DiffusionGrid::x(std::size_t i) const {
  return x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(x_cells - 1);
}

SubMarkovGenerator discretize_diffusion(const DiffusionSpec& spec, const DiffusionGrid& grid) {
  spec.validate();
  grid.validate();
  if (spec.dim != 1) throw InvalidArgument("discretization supports a one-dimensional trait");
  const double hx = (grid.x_hi - grid.x_lo) / static_cast<double>(grid.x_cells - 1);
  const double hn = grid.n_step;
  std::vector<Transition> tr;
  Vector kill(grid.size(), 0.0);
  double b[1];
  for (std::size_t j = 0; j < grid.n_cells; ++j)
    for (std::size_t i = 0; i < grid.x_cells; ++i) {
      const std::size_t s = grid.index(i, j);
      const double x = grid.x(i), n = grid.n(j);
      const double xv[1] = {x};
      spec.b(xv, n, b);
      const double sx = spec.sigma_X ? spec.sigma_X(xv, n) : 0.0;
      const double vx = 0.5 * sx * sx / (hx * hx);
      const double up_x = vx + std::max(b[0], 0.0) / hx, dn_x = vx + std::max(-b[0], 0.0) / hx;
      if (!std::isfinite(up_x) || !std::isfinite(dn_x)) throw InvalidArgument("trait coefficients are not finite");
      if (i + 1 < grid.x_cells && up_x > 0.0) tr.push_back({s, grid.index(i + 1, j), up_x});
      if (i > 0 && dn_x > 0.0) tr.push_back({s, grid.index(i - 1, j), dn_x});

      const double drift = (spec.r(xv) - spec.c * n) * n;
      const double vn = 0.5 * spec.sigma_N * spec.sigma_N * n / (hn * hn);
      const double up_n = vn + std::max(drift, 0.0) / hn, dn_n = vn + std::max(-drift, 0.0) / hn;
      if (!std::isfinite(up_n) || !std::isfinite(dn_n)) throw InvalidArgument("population coefficients are not finite");
      double k = spec.rho_c ? spec.rho_c(xv, n) : 0.0;
      if (j + 1 < grid.n_cells) {
        if (up_n > 0.0) tr.push_back({s, grid.index(i, j + 1), up_n});
      } else {
        k += up_n;
      }
      if (j > 0) {
        if (dn_n > 0.0) tr.push_back({s, grid.index(i, j - 1), dn_n});
      } else {
        k += dn_n;
      }
      kill[s] = k;
    }
  return SubMarkovGenerator(grid.size(), std::move(tr), std::move(kill));
}

Exhaustion diffusion_exhaustion(const DiffusionGrid& grid, const std::vector<double>& radii,
                                const std::vector<std::pair<double, double>>& n_ranges) {
  grid.validate();
  if (radii.size() != n_ranges.size() || radii.empty()) throw InvalidArgument("one population range per radius");
  Exhaustion e;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    std::vector<std::size_t> set;
    for (std::size_t j = 0; j < grid.n_cells; ++j)
      for (std::size_t i = 0; i < grid.x_cells; ++i) {
        double n = grid.n(j);
        if (std::abs(grid.x(i)) <= radii[k] && n >= n_ranges[k].first && n <= n_ranges[k].second)
          set.push_back(grid.index(i, j));
      }
    std::sort(set.begin(), set.end());
    e.sets.push_back(std::move(set));
  }
  std::vector<std::size_t> all(grid.size());
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  e.sets.push_back(std::move(all));
  e.s = 0;
  e.c = 1;
  e.m = 0;
  e.validate(grid.size());
  return e;
}

}  // namespace qsd
