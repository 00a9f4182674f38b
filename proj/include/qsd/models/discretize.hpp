#pragma once

#include <cstddef>
#include <vector>

#include "qsd/exhaustion.hpp"
#include "qsd/generator.hpp"
#include "qsd/models/diffusion.hpp"

namespace qsd {

// Uniform grid on [x_lo, x_hi] x [n_step, n_cells * n_step] for a one-dimensional trait.
struct DiffusionGrid {
  double x_lo = -4.0, x_hi = 4.0;
  std::size_t x_cells = 33;
  double n_step = 0.1;
  std::size_t n_cells = 40;

  void validate() const;
  std::size_t size() const { return x_cells * n_cells; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * x_cells + i; }
  double x(std::size_t i) const;
  double n(std::size_t j) const { return static_cast<double>(j + 1) * n_step; }
};

// Upwind chain approximation of (S): the trait reflects at the window edges,
// N is killed below the first cell and above the last, catastrophes kill.
SubMarkovGenerator discretize_diffusion(const DiffusionSpec& spec, const DiffusionGrid& grid);

// Nested boxes |x| <= r_k, N in [n_lo_k, n_hi_k] around the carrying capacity,
// with the last set the whole grid. s = m = 0 and c = 1.
Exhaustion diffusion_exhaustion(const DiffusionGrid& grid, const std::vector<double>& radii,
                                const std::vector<std::pair<double, double>>& n_ranges);

}  // namespace qsd
