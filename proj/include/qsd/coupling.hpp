#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsd/coupling_constants.hpp"
#include "qsd/generator.hpp"
#include "qsd/semigroup.hpp"

namespace qsd {

struct CouplingState {
  std::size_t j = 0;
  double r = 1.0;             // residual weight r_j
  ProbabilityVector nu;       // nu_j
  Vector a;                   // a_mu(k, j t_db) for k = 1..j
  double t_h = 0.0;
  std::size_t J = 0;
  double c_last = 0.0;        // c_{j-1} used to reach this state
  std::size_t clamped = 0;    // entries of nu_j clamped from [-1e-12, 0)
};

struct CouplingTraceRow {
  std::size_t j;
  double r;
  double c;         // c_j used for the next step (nan at the last step)
  double min_nu;
  double identity;  // reconstruction identity deviation (l1)
  double ser;       // closed-form residual deviation
  double mass_sum;  // |sum_k a + r - 1|
};

struct CouplingRun {
  std::vector<CouplingTraceRow> trace;
  CouplingState final_state;
  bool completed = false;
  std::optional<std::string> failure;  // InductionBroken message
  double domination_slack = 0.0;       // min_x (mu A_{t_h} - alpha_c[t_h])(x)
};

struct LowerBoundCheck {
  std::size_t mu_index;
  double t1, t2;
  double slack;     // min entry of mu A_{t2} - alpha_c[t1 - t_xt]
  double tv;        // |mu A_{t2} - mu A_{t1}|_TV
  double tv_bound;  // 2 (1 - c_bar)^{J(t1 - t_xt)}
  double exp_bound; // C(n, xi) e^{-zeta t1}
  bool ok;
};

// Exact coupling construction on a finite chain; all survival probabilities
// come from uniformization.
class CouplingEngine {
 public:
  CouplingEngine(const SubMarkovGenerator& gen, CouplingConstants consts, double tol = kDefaultTol);

  const CouplingConstants& constants() const { return k_; }

  std::size_t horizon_steps(double t_h) const;
  double coupling_mass(const ProbabilityVector& mu, std::size_t k, double t, double t_h) const;
  CouplingState start(const ProbabilityVector& mu, double t_h) const;
  CouplingState advance(const CouplingState& s, const ProbabilityVector& mu) const;
  double residual_identity(const CouplingState& s, const ProbabilityVector& mu) const;
  double reconstruction_deviation(const CouplingState& s, const ProbabilityVector& mu) const;
  ProbabilityVector minorizing_measure(double t_h) const;

  CouplingRun run(const ProbabilityVector& mu, double t_h) const;
  std::vector<LowerBoundCheck> verify_lower_bound(const std::vector<ProbabilityVector>& mus,
                                                  const std::vector<std::pair<double, double>>& t_pairs) const;
  // min_x of P_mu(X_{t_ev} = x | t_h < ext) - alpha^{t_h}_{c:J}(t_ev, x) with J = J(t_h).
  double glb_slack(const ProbabilityVector& mu, double t_ev, double t_h) const;

  double log_survival(const Vector& mu, double t) const;
  ProbabilityVector conditioned(const Vector& mu, double t) const;

 private:
  const SubMarkovGenerator* gen_;
  CouplingConstants k_;
  Propagator prop_;
};

std::size_t horizon_steps(double t_h, const CouplingConstants& consts);
double coupling_mass(const SubMarkovGenerator& gen, const CouplingConstants& consts, const ProbabilityVector& mu,
                     std::size_t k, double t, double t_h);
CouplingState advance(const CouplingState& state, const SubMarkovGenerator& gen, const CouplingConstants& consts,
                      const ProbabilityVector& mu);
double residual_identity(const CouplingState& state, const SubMarkovGenerator& gen, const CouplingConstants& consts,
                         const ProbabilityVector& mu);
ProbabilityVector minorizing_measure(const SubMarkovGenerator& gen, const CouplingConstants& consts, double t_h);
std::vector<LowerBoundCheck> verify_lower_bound(const SubMarkovGenerator& gen, const CouplingConstants& consts,
                                                const std::vector<ProbabilityVector>& mus,
                                                const std::vector<std::pair<double, double>>& t_pairs);

}  // namespace qsd
