#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsd/probability_vector.hpp"

namespace qsd {

struct Transition {
  std::size_t from;
  std::size_t to;
  double rate;
};

// Sub-Markovian rate matrix on states 0..S-1 stored as sparse off-diagonal
// rates (CSR by row) plus a per-state kill rate towards the cemetery.
class SubMarkovGenerator {
 public:
  SubMarkovGenerator() = default;
  SubMarkovGenerator(std::size_t n_states, std::vector<Transition> rates, Vector kill);

  std::size_t size() const { return kill_.size(); }
  std::size_t nnz() const { return col_.size(); }

  double kill(std::size_t i) const { return kill_[i]; }
  const Vector& kill_rates() const { return kill_; }
  double exit_rate(std::size_t i) const { return exit_[i]; }
  double diag(std::size_t i) const { return -exit_[i]; }
  double max_exit_rate() const;

  // Row i off-diagonal entries.
  std::span<const std::size_t> row_cols(std::size_t i) const;
  std::span<const double> row_rates(std::size_t i) const;
  double rate(std::size_t i, std::size_t j) const;

  std::vector<Transition> transitions() const;

  // Generator killed on leaving `keep`: rates into dropped states become kill.
  // States are renumbered in the order given.
  SubMarkovGenerator restrict_to(std::span<const std::size_t> keep) const;

  // Same off-diagonal rates with kill replaced.
  SubMarkovGenerator with_kill(Vector kill) const;

  // Generator applied to a column vector: (Qf)(i).
  Vector apply_right(std::span<const double> f) const;
  // Row vector times generator: (muQ)(j).
  Vector apply_left(std::span<const double> mu) const;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  Vector val_;
  Vector kill_;
  Vector exit_;
};

}  // namespace qsd
