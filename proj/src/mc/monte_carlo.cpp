#include "qsd/mc/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <tuple>

#include "qsd/errors.hpp"
#include "qsd/semigroup.hpp"

namespace qsd {

std::size_t sample_index(RngStream& g, const ProbabilityVector& mu) {
  double u = uniform_open(g) * mu.mass();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0) continue;
    acc += mu[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

JumpSampler::JumpSampler(const SubMarkovGenerator& gen) {
  std::size_t n = gen.size();
  ptr_.assign(n + 1, 0);
  exit_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = gen.row_cols(i);
    auto rates = gen.row_rates(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      acc += rates[k];
      to_.push_back(cols[k]);
      cum_.push_back(acc);
    }
    if (gen.kill(i) > 0.0) {
      acc += gen.kill(i);
      to_.push_back(kDead);
      cum_.push_back(acc);
    }
    exit_[i] = acc;
    ptr_[i + 1] = to_.size();
  }
}

std::size_t JumpSampler::jump(std::size_t x, RngStream& g) const {
  double u = uniform_open(g) * exit_[x];
  auto b = cum_.begin() + static_cast<std::ptrdiff_t>(ptr_[x]);
  auto e = cum_.begin() + static_cast<std::ptrdiff_t>(ptr_[x + 1]);
  auto it = std::upper_bound(b, e, u);
  if (it == e) --it;
  return to_[static_cast<std::size_t>(it - cum_.begin())];
}

std::size_t JumpSampler::state_at(std::size_t x, double t, RngStream& g) const {
  double clock = 0.0;
  while (true) {
    if (exit_[x] <= 0.0) return x;
    clock += exponential(g, exit_[x]);
    if (clock > t) return x;
    x = jump(x, g);
    if (x == kDead) return kDead;
  }
}

std::size_t JumpPath::state_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return states.front();
  std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  return states[k];
}

namespace {

// Appends the free motion of a particle started at (t0, x) up to t1.
// Returns the absorption time, or t1 when the particle survives.
double run_segment(const JumpSampler& s, std::size_t x, double t0, double t1, RngStream& g, JumpPath& path) {
  path.times.push_back(t0);
  path.states.push_back(x);
  double clock = t0;
  while (true) {
    if (s.exit_rate(x) <= 0.0) return t1;
    clock += exponential(g, s.exit_rate(x));
    if (clock > t1) return t1;
    x = s.jump(x, g);
    if (x == kDead) return clock;
    path.times.push_back(clock);
    path.states.push_back(x);
  }
}

}  // namespace

JumpPath gillespie(const SubMarkovGenerator& gen, std::size_t x0, double t_max, RngStream& g) {
  if (x0 >= gen.size()) throw InvalidArgument("initial state out of range");
  JumpSampler s(gen);
  JumpPath p;
  double end = run_segment(s, x0, 0.0, t_max, g, p);
  if (end < t_max) p.extinction_time = end;
  return p;
}

McEstimate estimate_dcne_naive(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                               std::size_t n_paths, std::uint64_t seed) {
  if (n_paths == 0) throw InvalidArgument("n_paths must be positive");
  if (mu.size() != gen.size()) throw DimensionMismatch("measure length differs from state count");
  check_time(t);
  JumpSampler s(gen);
  std::vector<std::size_t> end(n_paths);
  auto np = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    RngStream g(seed, static_cast<std::uint64_t>(i));
    std::size_t x = sample_index(g, mu);
    end[static_cast<std::size_t>(i)] = s.state_at(x, t, g);
  }
  Vector counts(gen.size(), 0.0);
  std::size_t alive = 0;
  for (auto x : end)
    if (x != kDead) {
      counts[x] += 1.0;
      ++alive;
    }
  if (alive == 0) throw AllExtinct("no path survived to t");
  for (auto& c : counts) c /= static_cast<double>(alive);
  McEstimate out;
  out.estimate = ProbabilityVector(std::move(counts));
  out.ess = alive;
  out.n_paths = n_paths;
  out.stderr_tv = std::sqrt(static_cast<double>(gen.size()) / static_cast<double>(alive));
  out.seed = seed;
  return out;
}

ProbabilityVector ParticleEnsemble::empirical(std::size_t n_states) const {
  Vector w(n_states, 0.0);
  for (auto x : positions) w[x] += 1.0;
  for (auto& v : w) v /= static_cast<double>(positions.size());
  return ProbabilityVector(std::move(w));
}

double ParticleEnsemble::absorption_rate(double t0) const {
  if (!(clock > t0)) throw InvalidArgument("window must be nonempty");
  auto n = std::count_if(resample_times.begin(), resample_times.end(), [&](double s) { return s >= t0; });
  return static_cast<double>(n) / (static_cast<double>(n_particles) * (clock - t0));
}

ParticleEnsemble fleming_viot(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                              std::size_t n_particles, std::uint64_t seed, FlemingViotOptions opts) {
  if (n_particles < 2) throw InvalidArgument("Fleming-Viot needs at least two particles");
  if (mu.size() != gen.size()) throw DimensionMismatch("measure length differs from state count");
  check_time(t);
  JumpSampler s(gen);
  double epoch = opts.epoch > 0.0 ? opts.epoch : 32.0 / std::max(gen.max_exit_rate(), 1e-300);
  std::vector<RngStream> rng;
  rng.reserve(n_particles);
  ParticleEnsemble ens;
  ens.n_particles = n_particles;
  ens.seed = seed;
  ens.positions.resize(n_particles);
  for (std::size_t i = 0; i < n_particles; ++i) {
    rng.emplace_back(seed, i);
    ens.positions[i] = sample_index(rng[i], mu);
  }
  std::vector<JumpPath> paths(n_particles);
  std::vector<double> death(n_particles);
  auto np = static_cast<std::ptrdiff_t>(n_particles);
  double t0 = 0.0;
  while (t0 < t) {
    double t1 = std::min(t, t0 + epoch);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < np; ++ii) {
      auto i = static_cast<std::size_t>(ii);
      paths[i] = JumpPath{};
      death[i] = run_segment(s, ens.positions[i], t0, t1, rng[i], paths[i]);
    }
    using Event = std::tuple<double, std::size_t>;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    for (std::size_t i = 0; i < n_particles; ++i)
      if (death[i] < t1) queue.emplace(death[i], i);
    while (!queue.empty()) {
      auto [tau, i] = queue.top();
      queue.pop();
      std::uniform_int_distribution<std::size_t> pick(0, n_particles - 2);
      std::size_t j = pick(rng[i]);
      if (j >= i) ++j;
      std::size_t y = paths[j].state_at(tau);
      ens.resample_times.push_back(tau);
      ++ens.resample_log;
      death[i] = run_segment(s, y, tau, t1, rng[i], paths[i]);
      if (death[i] < t1) queue.emplace(death[i], i);
    }
    for (std::size_t i = 0; i < n_particles; ++i) ens.positions[i] = paths[i].states.back();
    t0 = t1;
  }
  ens.clock = t;
  return ens;
}

SubMarkovGenerator qprocess_generator(const SubMarkovGenerator& gen, const EigenPair& ep) {
  if (ep.eta.size() != gen.size()) throw DimensionMismatch("eta length differs from state count");
  for (double e : ep.eta)
    if (!(e > 0.0)) throw InvalidArgument("eta must be positive");
  std::vector<Transition> tr;
  for (const auto& e : gen.transitions()) tr.push_back({e.from, e.to, e.rate * ep.eta[e.to] / ep.eta[e.from]});
  return SubMarkovGenerator(gen.size(), std::move(tr), Vector(gen.size(), 0.0));
}

double qprocess_row_sum_defect(const SubMarkovGenerator& gen, const EigenPair& ep) {
  double worst = 0.0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    auto cols = gen.row_cols(i);
    auto rates = gen.row_rates(i);
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += rates[k] * ep.eta[cols[k]] / ep.eta[i];
    worst = std::max(worst, std::abs(s - (gen.exit_rate(i) - ep.lambda0)));
  }
  return worst;
}

double qprocess_kernel_defect(const SubMarkovGenerator& gen, const EigenPair& ep, double t, double tol) {
  auto q = qprocess_generator(gen, ep);
  Propagator pq(q, tol), pp(gen, tol);
  double worst = 0.0;
  for (std::size_t x = 0; x < gen.size(); ++x) {
    auto dx = ProbabilityVector::delta(gen.size(), x);
    auto qt = pq.apply(Side::Left, dx.span(), t);
    auto pt = pp.apply(Side::Left, ScaledVector::from(dx.weights()), t);
    for (std::size_t y = 0; y < gen.size(); ++y) {
      double v = pt.values[y] * std::exp(pt.log_scale + ep.lambda0 * t) * ep.eta[y] / ep.eta[x];
      worst = std::max(worst, std::abs(qt[y] - v));
    }
  }
  return worst;
}

double eta_transform_defect(const SubMarkovGenerator& gen, const EigenPair& ep, const ProbabilityVector& mu, double t,
                            double tol) {
  auto push = [&](std::span<const double> m) {
    Vector w(m.size());
    double z = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) z += (w[i] = m[i] * ep.eta[i]);
    for (auto& v : w) v /= z;
    return w;
  };
  Propagator pp(gen, tol);
  auto mpt = pp.apply(Side::Left, ScaledVector::from(mu.weights()), t);
  auto lhs = push(mpt.values);
  auto q = qprocess_generator(gen, ep);
  Propagator pq(q, tol);
  auto rhs = pq.apply(Side::Left, push(mu.span()), t);
  return l1_distance(lhs, rhs);
}

JumpPath qprocess_simulate(const SubMarkovGenerator& gen, const EigenPair& ep, std::size_t x0, double t_max,
                           RngStream& g) {
  return gillespie(qprocess_generator(gen, ep), x0, t_max, g);
}

QProcessRun qprocess_occupation(const SubMarkovGenerator& gen, const EigenPair& ep, std::size_t x0,
                                std::size_t n_steps, std::size_t burn_in, RngStream& g) {
  auto q = qprocess_generator(gen, ep);
  JumpSampler s(q);
  QProcessRun out;
  out.occupation.assign(gen.size(), 0.0);
  std::size_t x = x0;
  for (std::size_t k = 0; k < n_steps + burn_in; ++k) {
    if (s.exit_rate(x) <= 0.0) break;
    double h = exponential(g, s.exit_rate(x));
    if (k >= burn_in) out.occupation[x] += h;
    x = s.jump(x, g);
    ++out.steps;
  }
  double z = sum(out.occupation);
  if (z > 0.0)
    for (auto& v : out.occupation) v /= z;
  return out;
}

}  // namespace qsd
