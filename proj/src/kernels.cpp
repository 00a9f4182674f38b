#include "qsd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <omp.h>

#include "qsd/errors.hpp"

namespace qsd {

UniformizedKernel::UniformizedKernel(const SubMarkovGenerator& gen, double lambda) : n_(gen.size()) {
  double lmax = gen.max_exit_rate();
  lambda_ = lambda > 0.0 ? lambda : (lmax > 0.0 ? lmax : 1.0);
  if (n_ > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("state space too large");
  if (lambda_ < lmax) throw InvalidArgument("uniformization rate below the maximal exit rate");

  rptr_.assign(n_ + 1, 0);
  cptr_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    rptr_[i + 1] = rptr_[i] + gen.row_cols(i).size() + 1;
    cptr_[i + 1] += 1;
    for (auto j : gen.row_cols(i)) cptr_[j + 1] += 1;
  }
  for (std::size_t j = 0; j < n_; ++j) cptr_[j + 1] += cptr_[j];
  rcol_.resize(rptr_[n_]);
  rval_.resize(rptr_[n_]);
  crow_.resize(cptr_[n_]);
  cval_.resize(cptr_[n_]);
  std::vector<std::size_t> fill(cptr_.begin(), cptr_.end() - 1);
  for (std::size_t i = 0; i < n_; ++i) {
    auto cols = gen.row_cols(i);
    auto vals = gen.row_rates(i);
    std::size_t p = rptr_[i];
    double kii = 1.0 - gen.exit_rate(i) / lambda_;
    // Diagonal inserted in column order so both layouts are sorted.
    bool placed = false;
    auto put_diag = [&] {
      rcol_[p] = static_cast<std::uint32_t>(i);
      rval_[p++] = kii;
      crow_[fill[i]] = static_cast<std::uint32_t>(i);
      cval_[fill[i]++] = kii;
      placed = true;
    };
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (!placed && cols[k] > i) put_diag();
      double v = vals[k] / lambda_;
      rcol_[p] = static_cast<std::uint32_t>(cols[k]);
      rval_[p++] = v;
      crow_[fill[cols[k]]] = static_cast<std::uint32_t>(i);
      cval_[fill[cols[k]]++] = v;
    }
    if (!placed) put_diag();
  }
}

void UniformizedKernel::left_serial(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < n_; ++j) {
    double s = 0.0;
    for (std::size_t k = cptr_[j]; k < cptr_[j + 1]; ++k) s += in[crow_[k]] * cval_[k];
    out[j] = s;
  }
}

void UniformizedKernel::left_parallel(std::span<const double> in, std::span<double> out) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = cptr_[j]; k < cptr_[j + 1]; ++k) s += in[crow_[k]] * cval_[k];
    out[j] = s;
  }
}

void UniformizedKernel::right_serial(std::span<const double> in, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = rptr_[i]; k < rptr_[i + 1]; ++k) s += rval_[k] * in[rcol_[k]];
    out[i] = s;
  }
}

void UniformizedKernel::right_parallel(std::span<const double> in, std::span<double> out) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = rptr_[i]; k < rptr_[i + 1]; ++k) s += rval_[k] * in[rcol_[k]];
    out[i] = s;
  }
}

void UniformizedKernel::left(std::span<const double> in, std::span<double> out) const {
  if (n_ >= kParallelThreshold)
    left_parallel(in, out);
  else
    left_serial(in, out);
}

void UniformizedKernel::right(std::span<const double> in, std::span<double> out) const {
  if (n_ >= kParallelThreshold)
    right_parallel(in, out);
  else
    right_serial(in, out);
}

namespace {

double fused_rows(std::ptrdiff_t lo, std::ptrdiff_t hi, const std::size_t* __restrict ptr,
                  const std::uint32_t* __restrict idx, const double* __restrict val, const double* __restrict in,
                  double* __restrict out, double* __restrict acc, double f) {
  double m = 0.0;
  std::size_t k = ptr[lo];
  for (std::ptrdiff_t j = lo; j < hi; ++j) {
    const std::size_t e = ptr[j + 1];
    double s = 0.0;
    for (; k < e; ++k) s += in[idx[k]] * val[k];
    out[j] = s;
    acc[j] += f * s;
    m = std::max(m, std::abs(s));
  }
  return m;
}

}  // namespace

double UniformizedKernel::step_accumulate(bool left, std::span<const double> in, std::span<double> out,
                                          std::span<double> acc, double f) const {
  const std::size_t* ptr = (left ? cptr_ : rptr_).data();
  const std::uint32_t* idx = (left ? crow_ : rcol_).data();
  const double* val = (left ? cval_ : rval_).data();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
  if (n_ < kParallelThreshold || omp_get_max_threads() == 1)
    return fused_rows(0, n, ptr, idx, val, in.data(), out.data(), acc.data(), f);
  double m = 0.0;
#pragma omp parallel reduction(max : m)
  {
    const std::ptrdiff_t nt = omp_get_num_threads(), t = omp_get_thread_num();
    const std::ptrdiff_t lo = n * t / nt, hi = n * (t + 1) / nt;
    m = fused_rows(lo, hi, ptr, idx, val, in.data(), out.data(), acc.data(), f);
  }
  return m;
}

PoissonWindow poisson_window(double a, double tol) {
  if (!std::isfinite(a) || a < 0.0) throw InvalidArgument("Poisson parameter must be finite and nonnegative");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  PoissonWindow pw;
  if (a == 0.0) {
    pw.weights = {1.0};
    return pw;
  }
  // Weights relative to the mode, grown outwards so nothing underflows.
  std::size_t mode = static_cast<std::size_t>(std::floor(a));
  std::vector<double> up{1.0};
  double total = 1.0;
  const double cut = 0.25 * tol;
  for (std::size_t k = mode + 1;; ++k) {
    double w = up.back() * a / static_cast<double>(k);
    up.push_back(w);
    total += w;
    double r = a / static_cast<double>(k + 1);
    if (r < 1.0 && w * r / (1.0 - r) < cut * total) break;
  }
  std::vector<double> down;
  double w = 1.0;
  for (std::size_t k = mode; k > 0; --k) {
    w *= static_cast<double>(k) / a;
    double r = static_cast<double>(k - 1) / a;
    down.push_back(w);
    total += w;
    if (r < 1.0 && w * r / (1.0 - r) < cut * total) break;
  }
  pw.a = a;
  pw.left = mode - down.size();
  pw.weights.assign(down.rbegin(), down.rend());
  pw.weights.insert(pw.weights.end(), up.begin(), up.end());
  for (auto& v : pw.weights) v /= total;
  return pw;
}

double PoissonWindow::log_weight(std::size_t k) const {
  if (k >= left && k <= right()) return std::log(weights[k - left]);
  double kk = static_cast<double>(k);
  return -a + kk * std::log(a) - std::lgamma(kk + 1.0);
}

}  // namespace qsd
