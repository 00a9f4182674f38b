#include "qsd/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

SubMarkovGenerator::SubMarkovGenerator(std::size_t n_states, std::vector<Transition> rates, Vector kill)
    : kill_(std::move(kill)) {
  if (n_states == 0) throw InvalidArgument("generator needs at least one state");
  if (kill_.size() != n_states) throw DimensionMismatch("kill vector length differs from state count");
  for (std::size_t i = 0; i < n_states; ++i) {
    if (!std::isfinite(kill_[i]) || kill_[i] < 0.0)
      throw InvalidArgument("kill rate must be finite and nonnegative at state " + std::to_string(i));
  }
  for (const auto& t : rates) {
    if (t.from >= n_states || t.to >= n_states) throw DimensionMismatch("rate index out of range");
    if (t.from == t.to) throw InvalidArgument("diagonal entries are implied, got rate on " + std::to_string(t.from));
    if (!std::isfinite(t.rate) || t.rate < 0.0)
      throw InvalidArgument("rate must be finite and nonnegative");
  }
  std::sort(rates.begin(), rates.end(), [](const Transition& a, const Transition& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  row_ptr_.assign(n_states + 1, 0);
  std::size_t last_from = n_states, last_to = n_states;
  for (const auto& t : rates) {
    if (t.rate == 0.0) continue;
    if (t.from == last_from && t.to == last_to) {
      val_.back() += t.rate;
      continue;
    }
    col_.push_back(t.to);
    val_.push_back(t.rate);
    ++row_ptr_[t.from + 1];
    last_from = t.from;
    last_to = t.to;
  }
  for (std::size_t i = 0; i < n_states; ++i) row_ptr_[i + 1] += row_ptr_[i];
  exit_.assign(n_states, 0.0);
  for (std::size_t i = 0; i < n_states; ++i) {
    double s = kill_[i];
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k];
    exit_[i] = s;
  }
}

double SubMarkovGenerator::max_exit_rate() const { return *std::max_element(exit_.begin(), exit_.end()); }

std::span<const std::size_t> SubMarkovGenerator::row_cols(std::size_t i) const {
  return std::span<const std::size_t>(col_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

std::span<const double> SubMarkovGenerator::row_rates(std::size_t i) const {
  return std::span<const double>(val_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

double SubMarkovGenerator::rate(std::size_t i, std::size_t j) const {
  if (i == j) return diag(i);
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return row_rates(i)[static_cast<std::size_t>(it - cols.begin())];
}

std::vector<Transition> SubMarkovGenerator::transitions() const {
  std::vector<Transition> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.push_back({i, col_[k], val_[k]});
  return out;
}

SubMarkovGenerator SubMarkovGenerator::restrict_to(std::span<const std::size_t> keep) const {
  if (keep.empty()) throw EmptyDomain("restriction to an empty set");
  std::vector<std::size_t> index(size(), size());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    if (keep[a] >= size()) throw DimensionMismatch("restriction index out of range");
    if (index[keep[a]] != size()) throw InvalidArgument("restriction set has duplicates");
    index[keep[a]] = a;
  }
  std::vector<Transition> rates;
  Vector kill(keep.size(), 0.0);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    std::size_t i = keep[a];
    kill[a] = kill_[i];
    auto cols = row_cols(i);
    auto vals = row_rates(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::size_t b = index[cols[k]];
      if (b == size())
        kill[a] += vals[k];
      else
        rates.push_back({a, b, vals[k]});
    }
  }
  return SubMarkovGenerator(keep.size(), std::move(rates), std::move(kill));
}

SubMarkovGenerator SubMarkovGenerator::with_kill(Vector kill) const {
  return SubMarkovGenerator(size(), transitions(), std::move(kill));
}

Vector SubMarkovGenerator::apply_right(std::span<const double> f) const {
  if (f.size() != size()) throw DimensionMismatch("apply_right: size mismatch");
  Vector out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    double s = -exit_[i] * f[i];
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * f[col_[k]];
    out[i] = s;
  }
  return out;
}

Vector SubMarkovGenerator::apply_left(std::span<const double> mu) const {
  if (mu.size() != size()) throw DimensionMismatch("apply_left: size mismatch");
  Vector out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = -exit_[i] * mu[i];
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out[col_[k]] += mu[i] * val_[k];
  return out;
}

}  // namespace qsd
