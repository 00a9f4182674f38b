#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qsd/generator.hpp"

namespace qsd {

// n -> rate on states n = 1..N_max.
struct RateFamily {
  enum class Kind { Constant, Linear, Table };
  Kind kind = Kind::Constant;
  double value = 0.0;      // Constant
  double slope = 0.0;      // Linear: intercept + slope * n
  double intercept = 0.0;
  std::vector<double> table;  // Table: table[n-1]; beyond the table, `value`

  static RateFamily constant(double v);
  static RateFamily linear(double slope, double intercept = 0.0);
  static RateFamily tabulated(std::vector<double> values, double beyond);

  double operator()(std::size_t n) const;
};

enum class BoundaryPolicy { KillAbove, ReflectAbove };

struct BDCParams {
  RateFamily b, d, c;
  std::size_t n_max = 2;
  BoundaryPolicy boundary = BoundaryPolicy::KillAbove;
};

// State n (1-based population size) is index n - 1.
SubMarkovGenerator build_bdc(const BDCParams& p);

struct BDNUParams {
  double b1 = 1.0, c1 = 0.5, b_bar = 2.0, d_bar = 1.0, c2 = 2.0;
  std::size_t n_max = std::size_t{1} << 14;
};

// b_n = b_bar n, d_n = d_bar n, c_n = c2 for n >= 2; b_1, c_1 given and d_1 = 0.
BDCParams bdnu_params(const BDNUParams& p);
SubMarkovGenerator build_bdnu(const BDNUParams& p);

// t_v = 1 / max(8 |b_bar - d_bar|, 1)
double bdnu_escape_time(const BDNUParams& p);
// 4 (b_bar + d_bar) / max(|b_bar - d_bar|, 1) * 2^{-n}
double bdnu_escape_bound(const BDNUParams& p, int n);
// 2^{-(2n-4)} (b_bar + d_bar) 2^{n+1} t_v; equals the above when |b_bar - d_bar| >= 1.
double bdnu_doob_bound(const BDNUParams& p, int n);

}  // namespace qsd
