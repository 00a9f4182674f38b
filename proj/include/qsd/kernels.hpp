#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qsd/generator.hpp"

namespace qsd {

// Stochastic kernel K = I + Q/Lambda of a generator, stored twice so that both
// the left action (mu K) and the right action (K f) are row sweeps.
class UniformizedKernel {
 public:
  // lambda <= 0 selects the generator's maximal exit rate.
  explicit UniformizedKernel(const SubMarkovGenerator& gen, double lambda = 0.0);

  double rate() const { return lambda_; }
  std::size_t size() const { return n_; }

  void left_serial(std::span<const double> in, std::span<double> out) const;
  void left_parallel(std::span<const double> in, std::span<double> out) const;
  void right_serial(std::span<const double> in, std::span<double> out) const;
  void right_parallel(std::span<const double> in, std::span<double> out) const;

  // Dispatches to the parallel kernel for large state spaces.
  void left(std::span<const double> in, std::span<double> out) const;
  void right(std::span<const double> in, std::span<double> out) const;

  // out = in K (left) or K in (right), acc += f * out; returns max |out|.
  double step_accumulate(bool left, std::span<const double> in, std::span<double> out, std::span<double> acc,
                         double f) const;


  static constexpr std::size_t kParallelThreshold = 4096;

 private:
  std::size_t n_ = 0;
  double lambda_ = 1.0;
  // Columns of K: entries (i, K_ij) for output j.
  std::vector<std::size_t> cptr_;
  std::vector<std::uint32_t> crow_;
  std::vector<double> cval_;
  // Rows of K: entries (j, K_ij) for output i.
  std::vector<std::size_t> rptr_;
  std::vector<std::uint32_t> rcol_;
  std::vector<double> rval_;
};

// Poisson(a) probabilities on the window [left, left + weights.size()),
// renormalized to sum one; the mass outside the window is below tol.
struct PoissonWindow {
  std::size_t left = 0;
  std::vector<double> weights;
  double a = 0.0;
  double log_norm = 0.0;  // log of the renormalization applied to the window
  std::size_t right() const { return left + weights.size() - 1; }
  // log P(N = k), also outside the window (left side only needed).
  double log_weight(std::size_t k) const;
};

PoissonWindow poisson_window(double a, double tol);

}  // namespace qsd
