#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical code.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

struct RawGenerator {
  std::size_t n = 0;
  std::vector<std::tuple<std::size_t, std::size_t, double>> rates;
  std::vector<double> kill;
};

inline Eigen::MatrixXd dense(const RawGenerator& g) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(g.n, g.n);
  for (auto [i, j, r] : g.rates) q(i, j) += r;
  for (std::size_t i = 0; i < g.n; ++i) {
    double s = g.kill[i];
    for (std::size_t j = 0; j < g.n; ++j)
      if (j != i) s += q(i, j);
    q(i, i) = -s;
  }
  return q;
}

// exp(tQ) by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& q, double t) {
  Eigen::MatrixXd a = q * t;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm > 0.125) {
    norm /= 2.0;
    ++s;
  }
  a /= std::ldexp(1.0, s);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(q.rows(), q.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

// Random sparse sub-generator; connected through a cycle so it is irreducible.
inline RawGenerator random_generator(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RawGenerator g;
  g.n = n;
  g.kill.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (n > 1) g.rates.emplace_back(i, (i + 1) % n, 0.1 + 2.0 * u(rng));
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && u(rng) < 0.3) g.rates.emplace_back(i, j, 3.0 * u(rng));
    g.kill[i] = u(rng) < 0.5 ? 2.0 * u(rng) : 0.0;
  }
  g.kill[0] += 0.05;
  return g;
}

// Golden-ratio chain q(1,2) = 1, q(2,1) = 1, kill (1, 0).
// Characteristic polynomial of Q = [[-2, 1], [1, -1]]: x^2 + 3x + 1.
inline const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
inline const double golden_lambda0 = (3.0 - std::sqrt(5.0)) / 2.0;
inline const double golden_lambda1 = (3.0 + std::sqrt(5.0)) / 2.0;
inline const double golden_alpha[2] = {1.0 / (1.0 + phi), phi / (1.0 + phi)};
inline const double golden_eta[2] = {(1.0 + phi) / (2.0 + phi), phi * (1.0 + phi) / (2.0 + phi)};

// Largest real part among eigenvalues of a dense matrix other than the top one.
inline std::vector<double> sorted_decay_rates(const Eigen::MatrixXd& q) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(q);
  std::vector<double> r;
  for (int i = 0; i < q.rows(); ++i) r.push_back(-es.eigenvalues()[i].real());
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace oracle
