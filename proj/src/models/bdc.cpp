#include "qsd/models/bdc.hpp"

#include <cmath>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

RateFamily RateFamily::constant(double v) {
  RateFamily f;
  f.kind = Kind::Constant;
  f.value = v;
  return f;
}

RateFamily RateFamily::linear(double slope, double intercept) {
  RateFamily f;
  f.kind = Kind::Linear;
  f.slope = slope;
  f.intercept = intercept;
  return f;
}

RateFamily RateFamily::tabulated(std::vector<double> values, double beyond) {
  RateFamily f;
  f.kind = Kind::Table;
  f.table = std::move(values);
  f.value = beyond;
  return f;
}

double RateFamily::operator()(std::size_t n) const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Linear: return intercept + slope * static_cast<double>(n);
    case Kind::Table: return n >= 1 && n <= table.size() ? table[n - 1] : value;
  }
  return 0.0;
}

SubMarkovGenerator build_bdc(const BDCParams& p) {
  if (p.n_max < 1) throw InvalidArgument("N_max must be at least 1");
  const std::size_t n_max = p.n_max;
  std::vector<Transition> rates;
  rates.reserve(2 * n_max);
  Vector kill(n_max, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double b = p.b(n), d = p.d(n), c = p.c(n);
    for (double v : {b, d, c})
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidArgument("rates must be finite and nonnegative (state " + std::to_string(n) + ")");
    std::size_t i = n - 1;
    kill[i] = c;
    if (n == 1)
      kill[i] += d;
    else
      rates.push_back({i, i - 1, d});
    if (n < n_max)
      rates.push_back({i, i + 1, b});
    else if (p.boundary == BoundaryPolicy::KillAbove)
      kill[i] += b;
  }
  return SubMarkovGenerator(n_max, std::move(rates), std::move(kill));
}

BDCParams bdnu_params(const BDNUParams& p) {
  if (!(p.c2 > p.b1 + p.c1)) throw InvalidArgument("the family needs c2 > b1 + c1");
  if (p.n_max < 2) throw InvalidArgument("N_max must be at least 2");
  std::vector<double> b(p.n_max), d(p.n_max), c(p.n_max);
  for (std::size_t n = 1; n <= p.n_max; ++n) {
    b[n - 1] = n == 1 ? p.b1 : p.b_bar * static_cast<double>(n);
    d[n - 1] = n == 1 ? 0.0 : p.d_bar * static_cast<double>(n);
    c[n - 1] = n == 1 ? p.c1 : p.c2;
  }
  BDCParams q;
  q.b = RateFamily::tabulated(std::move(b), 0.0);
  q.d = RateFamily::tabulated(std::move(d), 0.0);
  q.c = RateFamily::tabulated(std::move(c), p.c2);
  q.n_max = p.n_max;
  return q;
}

SubMarkovGenerator build_bdnu(const BDNUParams& p) { return build_bdc(bdnu_params(p)); }

double bdnu_escape_time(const BDNUParams& p) { return 1.0 / std::max(8.0 * std::abs(p.b_bar - p.d_bar), 1.0); }

double bdnu_escape_bound(const BDNUParams& p, int n) {
  return 4.0 * (p.b_bar + p.d_bar) / std::max(std::abs(p.b_bar - p.d_bar), 1.0) * std::ldexp(1.0, -n);
}

double bdnu_doob_bound(const BDNUParams& p, int n) {
  return 32.0 * (p.b_bar + p.d_bar) * bdnu_escape_time(p) * std::ldexp(1.0, -n);
}

}  // namespace qsd
