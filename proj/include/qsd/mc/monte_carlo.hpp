#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qsd/eigen.hpp"
#include "qsd/generator.hpp"
#include "qsd/mc/rng.hpp"
#include "qsd/probability_vector.hpp"

namespace qsd {

inline constexpr std::size_t kDead = static_cast<std::size_t>(-1);

inline double exponential(RngStream& g, double rate) { return -std::log(uniform_open(g)) / rate; }
std::size_t sample_index(RngStream& g, const ProbabilityVector& mu);

// Jump-chain sampler; kill is the last channel of every row.
class JumpSampler {
 public:
  explicit JumpSampler(const SubMarkovGenerator& gen);

  std::size_t size() const { return exit_.size(); }
  double exit_rate(std::size_t x) const { return exit_[x]; }
  // Next state after leaving x, kDead for absorption.
  std::size_t jump(std::size_t x, RngStream& g) const;
  // State at time t starting from x at time 0, kDead when absorbed before t.
  std::size_t state_at(std::size_t x, double t, RngStream& g) const;

 private:
  std::vector<std::size_t> ptr_, to_;
  std::vector<double> cum_, exit_;
};

struct JumpPath {
  std::vector<double> times;
  std::vector<std::size_t> states;
  std::optional<double> extinction_time;

  std::size_t state_at(double t) const;
};

JumpPath gillespie(const SubMarkovGenerator& gen, std::size_t x0, double t_max, RngStream& g);

struct McEstimate {
  ProbabilityVector estimate;
  std::size_t ess = 0;
  std::size_t n_paths = 0;
  double stderr_tv = 0.0;  // sqrt(S / ess), a crude TV error scale
  std::uint64_t seed = 0;
};

// Path i uses stream (seed, i).
McEstimate estimate_dcne_naive(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                               std::size_t n_paths, std::uint64_t seed);

struct FlemingViotOptions {
  double epoch = 0.0;  // 0 selects 32 / max exit rate
};

struct ParticleEnsemble {
  std::vector<std::size_t> positions;
  std::size_t n_particles = 0;
  double clock = 0.0;
  std::uint64_t seed = 0;
  std::size_t resample_log = 0;
  std::vector<double> resample_times;

  ProbabilityVector empirical(std::size_t n_states) const;
  // Resampling events per particle per unit time over [t0, clock].
  double absorption_rate(double t0) const;
};

// Exact Fleming-Viot dynamics. Particle i owns stream (seed, i); free motion
// within an epoch runs in parallel, absorptions are then replayed in time
// order, so the result does not depend on the thread count.
ParticleEnsemble fleming_viot(const SubMarkovGenerator& gen, const ProbabilityVector& mu, double t,
                              std::size_t n_particles, std::uint64_t seed, FlemingViotOptions opts = {});

// h-transform by eta: rates q(i,j) eta_j / eta_i, no killing.
SubMarkovGenerator qprocess_generator(const SubMarkovGenerator& gen, const EigenPair& ep);
// max_i |sum_{j != i} q(i,j) eta_j / eta_i - (exit_i - lambda0)|
double qprocess_row_sum_defect(const SubMarkovGenerator& gen, const EigenPair& ep);
// max |Q_t(x, y) - e^{lambda0 t} eta(y) / eta(x) P_t(x, y)| over all x, y.
double qprocess_kernel_defect(const SubMarkovGenerator& gen, const EigenPair& ep, double t, double tol = 1e-13);
// |eta_*(mu P_t) - (eta_* mu) Q_t|_1
double eta_transform_defect(const SubMarkovGenerator& gen, const EigenPair& ep, const ProbabilityVector& mu, double t,
                            double tol = 1e-13);

struct QProcessRun {
  JumpPath path;
  Vector occupation;  // holding-time weighted, after burn-in
  std::size_t steps = 0;
};

JumpPath qprocess_simulate(const SubMarkovGenerator& gen, const EigenPair& ep, std::size_t x0, double t_max,
                           RngStream& g);
QProcessRun qprocess_occupation(const SubMarkovGenerator& gen, const EigenPair& ep, std::size_t x0,
                                std::size_t n_steps, std::size_t burn_in, RngStream& g);

}  // namespace qsd
