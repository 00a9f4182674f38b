#include "qsd/models/nonuniformity.hpp"

#include <cmath>

#include "qsd/errors.hpp"
#include "qsd/semigroup.hpp"

namespace qsd {

double band_exit_probability(const BDNUParams& p, int n, double t, double tol) {
  if (n < 1) throw InvalidArgument("level must be at least 1");
  std::size_t lo = std::size_t{1} << (n - 1), hi = std::size_t{1} << (n + 1);
  BDNUParams q = p;
  q.n_max = hi + 1;
  auto bp = bdnu_params(q);
  bp.c = RateFamily::constant(0.0);
  auto full = build_bdc(bp);
  std::vector<std::size_t> keep;
  for (std::size_t k = lo + 1; k < hi; ++k) keep.push_back(k - 1);
  auto band = full.restrict_to(keep);
  // Leaving the band is redirected to an absorbing cemetery so the exit
  // probability is read directly instead of as 1 - survival.
  std::size_t m = band.size();
  auto tr = band.transitions();
  for (std::size_t i = 0; i < m; ++i)
    if (band.kill(i) > 0.0) tr.push_back({i, m, band.kill(i)});
  SubMarkovGenerator closed(m + 1, std::move(tr), Vector(m + 1, 0.0));
  std::size_t start = (std::size_t{1} << n) - (lo + 1);
  Propagator prop(closed, tol);
  auto v = prop.apply(Side::Left, ScaledVector::from(ProbabilityVector::delta(m + 1, start).weights()), t);
  return v.values[m] * std::exp(v.log_scale);
}

NonuniformityReport nonuniformity_experiment(const BDNUParams& p, double t, double eps,
                                             const std::vector<std::size_t>& heights, const std::vector<int>& levels,
                                             const NonuniformityOptions& opts) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  check_time(t);
  auto gen = build_bdnu(p);
  NonuniformityReport rep;
  rep.t = t;
  rep.eps = eps;
  rep.t_v = bdnu_escape_time(p);
  Propagator prop(gen, opts.tol);
  std::size_t n = gen.size();
  std::size_t top = n - std::max<std::size_t>(n / 16, 1);
  auto law = [&](std::size_t x) {
    auto v = prop.apply(Side::Left, ScaledVector::from(ProbabilityVector::delta(n, x - 1).weights()), t);
    double z = sum(v.values);
    if (!(z > 0.0)) throw ExtinctMass("no surviving mass");
    for (auto& w : v.values) w /= z;
    return v.values;
  };
  auto ref = law(1);
  for (std::size_t x : heights) {
    if (x < 1 || x > n) throw InvalidArgument("height outside 1..N_max");
    auto v = x == 1 ? ref : law(x);
    double topm = 0.0;
    for (std::size_t k = top; k < n; ++k) topm += v[k];
    rep.heights.push_back({x, tv_distance(v, ref), topm});
    if (topm > opts.top_mass_warning)
      rep.warnings.push_back("truncation inadequate at height " + std::to_string(x) + ": top mass " +
                             std::to_string(topm));
    if (!rep.witness && rep.heights.back().tv >= 1.0 - eps) {
      rep.witness = x;
      if (opts.stop_at_witness) break;
    }
  }
  for (int lv : levels) {
    if ((std::size_t{1} << (lv + 1)) > p.n_max) throw InvalidArgument("level band exceeds N_max");
    rep.levels.push_back({lv, band_exit_probability(p, lv, rep.t_v), bdnu_escape_bound(p, lv), bdnu_doob_bound(p, lv)});
  }
  rep.decreasing = true;
  rep.within_bound = true;
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    if (i > 0 && !(rep.levels[i].p < rep.levels[i - 1].p)) rep.decreasing = false;
    if (!(rep.levels[i].p <= rep.levels[i].bound)) rep.within_bound = false;
  }
  return rep;
}

}  // namespace qsd
