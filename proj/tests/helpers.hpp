#pragma once

#include "oracles.hpp"
#include "qsd/generator.hpp"

inline qsd::SubMarkovGenerator to_generator(const oracle::RawGenerator& g) {
  std::vector<qsd::Transition> t;
  for (auto [i, j, r] : g.rates) t.push_back({i, j, r});
  return qsd::SubMarkovGenerator(g.n, t, g.kill);
}

inline qsd::SubMarkovGenerator golden_chain() {
  return qsd::SubMarkovGenerator(2, {{0, 1, 1.0}, {1, 0, 1.0}}, {1.0, 0.0});
}

#include "qsd/exhaustion.hpp"
#include "qsd/models/bdc.hpp"

// Birth-death chain with catastrophes: b_n = b, d_n = d (d_1 kills),
// c_n = 0 up to n_c and c_hi beyond.
inline qsd::SubMarkovGenerator small_bdc(std::size_t n_max, std::size_t n_c, double b = 1.0, double d = 1.0,
                                         double c_hi = 4.0) {
  qsd::BDCParams p;
  p.b = qsd::RateFamily::constant(b);
  p.d = qsd::RateFamily::constant(d);
  std::vector<double> c(n_c, 0.0);
  p.c = qsd::RateFamily::tabulated(c, c_hi);
  p.n_max = n_max;
  return qsd::build_bdc(p);
}

// D_0 = {1}, D_1 = [1, n_c], D_2 = everything; s = m = 0, c = 1.
inline qsd::Exhaustion bdc_exhaustion(std::size_t n_max, std::size_t n_c) {
  return qsd::Exhaustion::prefix({1, n_c, n_max}, 0, 1, 0);
}

#include "qsd/assumptions.hpp"

inline qsd::CertificateSet certify(const qsd::SubMarkovGenerator& g, const qsd::Exhaustion& exh,
                                   const qsd::EigenPair& ep, double t_mix) {
  auto grid = qsd::default_time_grid(g, ep);
  qsd::CertificateSet cs;
  cs.mix = qsd::check_mix(g, exh, exh.c, t_mix);
  cs.dc = qsd::check_dc(g, exh, *cs.mix.alpha_c, grid.front(), grid, ep);
  cs.et = qsd::check_et(g, exh, qsd::escape_rate_ceiling(g, exh));
  cs.sv = qsd::check_sv(g, exh, grid);
  cs.lj = qsd::check_lj();
  return cs;
}

inline qsd::CouplingConstants golden_constants() {
  auto g = golden_chain();
  auto ep = qsd::solve_eigentriple(g);
  auto exh = qsd::Exhaustion::prefix({1, 2}, 0, 1, 1);
  auto grid = qsd::default_time_grid(g, ep);
  qsd::CertificateSet cs;
  cs.mix = qsd::check_mix(g, exh, 1, 1.0, qsd::ProbabilityVector::delta(2, 0));
  cs.dc = qsd::check_dc(g, exh, *cs.mix.alpha_c, grid.front(), grid, ep);
  cs.et = qsd::check_et(g, exh, 10.0);
  cs.sv = qsd::check_sv(g, exh, grid);
  cs.lj = qsd::check_lj();
  return qsd::derive_coupling_constants(g, exh, cs, ep);
}
