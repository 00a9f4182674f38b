#include "qsd/eigen.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "qsd/errors.hpp"
#include "qsd/kernels.hpp"

namespace qsd {

ProbabilityVector EigenPair::beta() const {
  Vector b(eta.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = eta[i] * alpha[i];
  double s = sum(b);
  for (auto& x : b) x /= s;
  return ProbabilityVector(std::move(b));
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const SubMarkovGenerator& gen) {
  // Iterative Tarjan.
  const std::size_t n = gen.size();
  const std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unset), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;
  struct Frame {
    std::size_t v, edge;
  };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      auto cols = gen.row_cols(f.v);
      if (f.edge < cols.size()) {
        std::size_t w = cols[f.edge++];
        if (index[w] == unset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

bool is_irreducible(const SubMarkovGenerator& gen) { return strongly_connected_components(gen).size() == 1; }

namespace {

struct PowerResult {
  Vector vec;
  std::size_t iterations = 0;
  double ratio = 0.0;
};

// Power iteration for the dominant left (or right) eigenvector of K.
// The kernel uses twice the maximal exit rate, so K = I + Q/L has spectrum in
// the right half of the unit disc and no eigenvalue near -1 competes with the
// Perron root.
PowerResult power_iterate(const UniformizedKernel& k, bool left, double tol, std::size_t max_iter) {
  const std::size_t n = k.size();
  Vector cur(n, left ? 1.0 / static_cast<double>(n) : 1.0), next(n);
  const double floor = 8.0 * DBL_EPSILON * std::sqrt(static_cast<double>(n));
  double prev_diff = 0.0, ratio = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    if (left)
      k.left(cur, next);
    else
      k.right(cur, next);
    double norm = 0.0;
    if (left) {
      for (double x : next) norm += x;
    } else {
      for (double x : next) norm = std::max(norm, x);
    }
    if (!(norm > 0.0)) throw NoConvergence("power iteration collapsed to zero");
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      double d = std::abs(next[i] - cur[i]);
      diff = left ? diff + d : std::max(diff, d);
    }
    std::swap(cur, next);
    if (it > 1 && prev_diff > 0.0) ratio = std::min(diff / prev_diff, 1.0 - 1e-15);
    prev_diff = diff;
    double err = it > 2 ? diff * ratio / (1.0 - ratio) : diff;
    if (diff <= floor || (diff < tol && err < tol)) return {cur, it, ratio};
  }
  throw NoConvergence("power iteration did not converge within max_iter");
}

}  // namespace

EigenPair solve_eigentriple(const SubMarkovGenerator& gen, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!is_irreducible(gen)) throw NotIrreducible("generator is reducible; eigen-triple is not unique");
  double lmax = gen.max_exit_rate();
  UniformizedKernel k(gen, lmax > 0.0 ? 2.0 * lmax : 1.0);

  PowerResult l = power_iterate(k, true, tol, max_iter);
  PowerResult r = power_iterate(k, false, tol, max_iter);

  EigenPair ep;
  ep.iteration_rate = k.rate();
  ep.iterations = std::max(l.iterations, r.iterations);
  Vector alpha = l.vec;
  double s = sum(alpha);
  for (auto& x : alpha) x /= s;
  // Row sums of Q are -kill, so alpha Q 1 = -<alpha, kill>.
  ep.lambda0 = dot(alpha, gen.kill_rates());
  Vector eta = r.vec;
  double c = dot(alpha, eta);
  for (auto& x : eta) x /= c;
  ep.alpha = ProbabilityVector(alpha);
  ep.eta = eta;

  Vector la = gen.apply_left(alpha);
  Vector re = gen.apply_right(eta);
  for (std::size_t i = 0; i < gen.size(); ++i) {
    ep.residual_left += std::abs(la[i] + ep.lambda0 * alpha[i]);
    ep.residual_right = std::max(ep.residual_right, std::abs(re[i] + ep.lambda0 * eta[i]));
  }
  if (gen.size() == 1 || l.iterations < 4) {
    ep.gap_estimate = std::numeric_limits<double>::infinity();
  } else {
    double theta1 = 1.0 - ep.lambda0 / k.rate();
    ep.gap_estimate = k.rate() * theta1 * (1.0 - l.ratio);
    ep.degenerate_spectrum = ep.gap_estimate < std::sqrt(tol) * k.rate();
  }
  return ep;
}

double perron_rate(const SubMarkovGenerator& gen, double tol, std::size_t max_iter) {
  double lmax = gen.max_exit_rate();
  UniformizedKernel k(gen, lmax > 0.0 ? 2.0 * lmax : 1.0);
  PowerResult l = power_iterate(k, true, tol, max_iter);
  Vector alpha = l.vec;
  double s = sum(alpha);
  for (auto& x : alpha) x /= s;
  // For a reducible generator alpha Q need not be proportional to alpha;
  // the Rayleigh quotient on the converged vector still gives the rate.
  Vector la = gen.apply_left(alpha);
  return -sum(la);
}

}  // namespace qsd
