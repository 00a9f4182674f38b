#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qsd/mc/rng.hpp"

namespace qsd {

using Point = std::vector<double>;

// dN = (r(X) - c N) N dt + sigma_N sqrt(N) dB^N
// dX = b(X, N) dt + sigma_X(X, N) dB^X, catastrophes at rate rho_c(X, N).
struct DiffusionSpec {
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> r;
  double c = 1.0;
  double sigma_N = 1.0;
  std::function<void(std::span<const double>, double, std::span<double>)> b;
  std::function<double(std::span<const double>, double)> sigma_X;
  std::function<double(std::span<const double>, double)> rho_c;
  // sup of r outside the ball of the given radius
  std::function<double(double)> r_tail;
  double capacity = 1.0;  // typical carrying capacity, scales the absorption threshold

  void validate() const;
};

struct QuadraticWellParams {
  std::size_t dim = 1;
  double r0 = 1.0;     // r(x) = r0 - a |x|^2
  double a = 1.0;
  double c = 1.0;
  double sigma_N = 1.0;
  double theta = 1.0;  // b(x, n) = -theta x
  double sigma_X = 0.5;
  double rho0 = 0.0;   // rho_c(x, n) = rho0 + rho1 |x|^2
  double rho1 = 0.0;
};

DiffusionSpec quadratic_well(const QuadraticWellParams& p);
// r tabulated against |x| on an increasing grid, linear interpolation, flat beyond the ends.
DiffusionSpec tabulated_growth(DiffusionSpec base, std::vector<double> radii, std::vector<double> values);
// dZ = r Z dt + sigma sqrt(Z) dB: c = 0, no trait motion, no catastrophes.
DiffusionSpec feller(double r_plus, double sigma);

inline double to_y(double n, double sigma_N) { return 2.0 * std::sqrt(std::max(n, 0.0)) / sigma_N; }
inline double to_n(double y, double sigma_N) { return 0.25 * sigma_N * sigma_N * y * y; }

enum class Absorption { None, Fluctuation, Catastrophe };

struct DiffusionOptions {
  double eps_abs = 0.0;         // 0 selects 1e-6 * capacity
  bool adaptive = true;         // stability sub-steps
  double stability = 0.25;      // max relative drift move per sub-step
  std::size_t refresh = 100;    // steps between refreshes of the catastrophe bound
};

// One path of (S), advanced in outer steps of length dt.
class DiffusionStepper {
 public:
  DiffusionStepper(const DiffusionSpec& spec, Point x, double n, RngStream& g, DiffusionOptions opts = {});

  using StopFn = std::function<bool(std::span<const double>, double)>;

  // Advances by dt; returns true if stopped by absorption or by `stop` at a sub-step.
  bool step(double dt, const StopFn& stop = {});

  const Point& x() const { return x_; }
  double n() const { return n_; }
  double time() const { return t_; }
  Absorption absorbed() const { return absorbed_; }
  bool stopped() const { return stopped_; }

 private:
  double drift_n() const;
  void refresh_bound();

  const DiffusionSpec* spec_;
  Point x_;
  double n_;
  double t_ = 0.0;
  RngStream* g_;
  DiffusionOptions opts_;
  std::normal_distribution<double> normal_;
  Point bx_;
  double rho_bar_ = 0.0;
  double next_candidate_ = 0.0;
  std::size_t steps_ = 0;
  Absorption absorbed_ = Absorption::None;
  bool stopped_ = false;
};

struct DiffusionPath {
  std::vector<double> times;
  std::vector<Point> x;
  std::vector<double> n;
  Absorption absorption = Absorption::None;
  std::optional<double> extinction_time;
};

DiffusionPath simulate_diffusion(const DiffusionSpec& spec, const Point& x0, double n0, double dt, double t_max,
                                 RngStream& g, DiffusionOptions opts = {});

// P(ext <= t) for the Feller diffusion, Monte Carlo.
struct ProbabilityEstimate {
  double p = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};
ProbabilityEstimate feller_extinction_mc(double z0, double r_plus, double sigma, double t, double dt,
                                         std::size_t n_paths, std::uint64_t seed);

enum class Region { DeltaC, TY, T0, TX };
std::string to_string(Region r);

// Regions in (x, y) with y = 2 sqrt(N) / sigma_N:
// Delta_c = B(0, n_c) x (1/n_c, n_c], T0 = B(0, n_c) x [0, 1/n_c],
// TY = B^c x (y_inf, inf) u B x (n_c, inf), TX = B^c x [0, y_inf].
struct TransitoryDecomposition {
  double y_inf = 2.0;
  double n_c = 4.0;
  double sigma_N = 1.0;

  void validate() const;
  Region classify(std::span<const double> x, double n) const;
  // Starting points covering the region boundary and interior.
  std::vector<std::pair<Point, double>> start_grid(Region r, std::size_t dim) const;
};

struct EscapeStart {
  Point x;
  double n;
  double mean;    // E[exp(rho V)]
  double stderr_;
  std::size_t capped;
};

struct EscapeMomentEstimate {
  Region region;
  double rho;
  double sup;       // max over starts of the mean
  double stderr_;   // standard error at the argmax
  std::size_t capped = 0;
  std::vector<EscapeStart> starts;
};

struct EscapeOptions {
  double dt = 1e-3;
  double t_cap = 0.0;  // 0 selects 50 / rho
  DiffusionOptions diffusion;
};

// V = hitting time of Delta_c or extinction, capped at t_cap.
EscapeMomentEstimate escape_moment_mc(const DiffusionSpec& spec, const TransitoryDecomposition& dec, double rho,
                                      Region region, std::size_t n_paths, std::uint64_t seed,
                                      const EscapeOptions& opts = {});

struct EscapeConstants {
  double rho, t_D, t_m;
  double C_Y, C_Y_se;
  double C_X, eps_X, p_X, p_Y;
  double C_0, eps_0, p_0;
};

EscapeConstants estimate_escape_constants(const DiffusionSpec& spec, const TransitoryDecomposition& dec, double rho,
                                          std::size_t n_paths, std::uint64_t seed, const EscapeOptions& opts = {});

struct InequalityCheck {
  std::string name;
  double lhs, rhs, tolerance;  // holds when lhs <= rhs + tolerance
  bool holds;
};

struct EscapeReport {
  EscapeMomentEstimate E_Y, E_X, E_0;
  EscapeConstants k;
  std::vector<InequalityCheck> checks;  // EYi, EXi, EY0, smallness conditions, global bound
  double e_T;
  bool all_hold() const;
};

EscapeReport escape_report(const DiffusionSpec& spec, const TransitoryDecomposition& dec, double rho,
                           std::size_t n_paths, std::uint64_t seed, const EscapeOptions& opts = {});

// dY = psi_D(Y) dt + dB, psi_D(y) = -1/(2y) + r_D y/2 - c_Y y^3.
double psi_d(double y, double r_D, double c_Y);

struct DescentRow {
  double y;
  double p;   // P_y(t_D < descent time) or P_y(t_D < ext)
  double stderr_;
};

// P_y(t_D < inf{t : Y_t <= y_inf}) on y_grid.
std::vector<DescentRow> ydp_descent_check(double r_D, double c_Y, double t_D, double y_inf,
                                          const std::vector<double>& y_grid, std::size_t n_paths,
                                          std::uint64_t seed, double dt = 1e-3);
// P_{y0}(t_D < ext^D) for each r_D.
std::vector<DescentRow> ydp_extinction_sweep(const std::vector<double>& r_grid, double c_Y, double t_D, double y0,
                                             std::size_t n_paths, std::uint64_t seed, double dt = 1e-3);

}  // namespace qsd
