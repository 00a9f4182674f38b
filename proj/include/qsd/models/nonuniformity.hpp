#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qsd/models/bdc.hpp"

namespace qsd {

struct HeightRow {
  std::size_t height;
  double tv;        // |delta_x A_t - delta_1 A_t|_TV
  double top_mass;  // mass of delta_x A_t on the top 1/16 of the states
};

struct EscapeLevelRow {
  int n;
  double p;           // P_{2^n}(T_n <= t_v)
  double bound;       // 4 (b_bar + d_bar) / (|b_bar - d_bar| v 1) 2^{-n}
  double doob_bound;  // 32 (b_bar + d_bar) t_v 2^{-n}
};

struct NonuniformityReport {
  double t = 0.0, eps = 0.0, t_v = 0.0;
  std::vector<HeightRow> heights;
  std::optional<std::size_t> witness;
  std::vector<EscapeLevelRow> levels;
  bool decreasing = false;
  bool within_bound = false;
  std::vector<std::string> warnings;
};

struct NonuniformityOptions {
  bool stop_at_witness = false;
  double tol = 1e-10;
  double top_mass_warning = 1e-6;
};

// heights: initial sizes x (1-based); levels: n with 2^{n+1} <= N_max.
NonuniformityReport nonuniformity_experiment(const BDNUParams& p, double t, double eps,
                                             const std::vector<std::size_t>& heights, const std::vector<int>& levels,
                                             const NonuniformityOptions& opts = {});

// P_{2^n}(T_n <= t_v) on the band (2^{n-1}, 2^{n+1}) without catastrophes.
double band_exit_probability(const BDNUParams& p, int n, double t, double tol = 1e-12);

}  // namespace qsd
