#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qsd/certificate.hpp"
#include "qsd/coupling_constants.hpp"
#include "qsd/eigen.hpp"
#include "qsd/exhaustion.hpp"
#include "qsd/generator.hpp"
#include "qsd/semigroup.hpp"

namespace qsd {

// Rows P_x[X_t in dy; t < ext and t < exit time of D_m] for x in `starts`,
// in full-state coordinates.
std::vector<Vector> killed_kernel_rows(const SubMarkovGenerator& gen, std::span<const std::size_t> starts,
                                       std::span<const std::size_t> enclosure, double t, double tol = kDefaultTol);

// alpha_c = nullopt selects the normalized entrywise row minimum.
AssumptionCertificate check_mix(const SubMarkovGenerator& gen, const Exhaustion& exh, std::size_t n, double t,
                                const std::optional<ProbabilityVector>& alpha_c = std::nullopt,
                                double tol = kDefaultTol);

// Lower bound c (c alpha_c(D_s))^{k-1} for the same certificate at time k t.
double mix_extension_bound(const AssumptionCertificate& mix, std::size_t k);

AssumptionCertificate check_dc(const SubMarkovGenerator& gen, const Exhaustion& exh, const ProbabilityVector& alpha_c,
                               double t_floor, std::span<const double> t_grid, const EigenPair& ep,
                               double tol = kDefaultTol);

struct EscapeMoments {
  bool admissible = false;
  std::vector<std::size_t> transitory;  // states of T
  Vector f;                             // E_x[exp(rho V)] for x in T
  double e_T = 1.0;
  std::optional<std::size_t> worst_state;
};

// f = E_x[exp(rho (ext ^ hitting time of D_c))] on T by one sparse solve.
EscapeMoments escape_moments(const SubMarkovGenerator& gen, const Exhaustion& exh, double rho);
// Supremum of admissible rho, by bisection (40 steps), minus 1%.
double escape_rate_ceiling(const SubMarkovGenerator& gen, const Exhaustion& exh, int iterations = 40);

AssumptionCertificate check_et(const SubMarkovGenerator& gen, const Exhaustion& exh, double rho);
AssumptionCertificate check_sv(const SubMarkovGenerator& gen, const Exhaustion& exh, std::span<const double> t_grid,
                               double tol = kDefaultTol);
// Survival bound from a (Mix) certificate: rho_sv = -ln(c_rg) / t_rg with c_rg = c alpha_c(D_s).
AssumptionCertificate check_sv_regeneration(const AssumptionCertificate& mix);
AssumptionCertificate check_lj();

struct CertificateSet {
  AssumptionCertificate mix, dc, et, sv, lj;
  bool all_hold() const { return mix.holds && dc.holds && et.holds && sv.holds && lj.holds; }
  std::vector<const AssumptionCertificate*> all() const { return {&mix, &dc, &et, &sv, &lj}; }
};

// Log grid from 0.01/Lambda to 30/(spectral gap estimate), 64 points per decade.
std::vector<double> default_time_grid(const SubMarkovGenerator& gen, const EigenPair& ep);

struct CouplingOptions {
  std::optional<std::size_t> n_rn;  // default: the whole state space
  double xi_rn = 1.0;
  std::vector<double> t_grid;       // grid for the (t_ps, c_ps) search; default_time_grid when empty
  std::vector<double> t_db_candidates;
  double tol = kDefaultTol;
};

struct CouplingDiagnostics {
  double ratio_limit = 0.0;      // max_x eta(x) / <alpha_c|eta>
  double c_ps_raw = 0.0;
  double c_db_raw = 0.0;
  double renewal_margin = 0.0;   // min over M_rn vertices of the renewal lhs minus xi_rn
  std::vector<double> t_db_scan, zeta_scan;
};

CouplingConstants derive_coupling_constants(const SubMarkovGenerator& gen, const Exhaustion& exh,
                                            const CertificateSet& certs, const EigenPair& ep,
                                            const CouplingOptions& opts = {}, CouplingDiagnostics* diag = nullptr);

// max(c'_ps, exp(lambda0 t_ps)) with c'_ps = c_ps exp(-lambda0 t_mx) / (alpha(D_n) c_mx).
double eta_sup_bound(const CouplingConstants& consts, const AssumptionCertificate& mix, const Exhaustion& exh,
                     const EigenPair& ep);

struct RetentionLevel {
  std::size_t n;
  double xi;                 // alpha(D_n)^2
  std::optional<double> t_xt;
};

struct MassRetentionReport {
  std::vector<RetentionLevel> levels;
  std::size_t chosen = 0;                        // index into levels
  std::vector<std::optional<double>> per_mu_time;  // retention time of each mu at the chosen level
};

MassRetentionReport verify_mass_retention(const SubMarkovGenerator& gen, const Exhaustion& exh,
                                          const std::vector<ProbabilityVector>& mus, std::span<const double> t_grid,
                                          const EigenPair& ep, double tol = kDefaultTol);

// Dirac masses on all states plus n_random Dirichlet(1) mixtures.
std::vector<ProbabilityVector> stress_set(std::size_t n_states, std::size_t n_random, unsigned long long seed);

struct ReplayResult {
  bool ok = false;
  double worst_slack = 0.0;  // most negative slack of the defining inequality
  std::string detail;
};

ReplayResult replay_certificate(const AssumptionCertificate& cert, const SubMarkovGenerator& gen,
                                const Exhaustion& exh, const EigenPair& ep, double tol = kDefaultTol);

}  // namespace qsd
