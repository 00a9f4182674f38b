#include "qsd/exhaustion.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "qsd/errors.hpp"

namespace qsd {

Exhaustion Exhaustion::prefix(std::vector<std::size_t> sizes, std::size_t s, std::size_t c, std::size_t m) {
  Exhaustion e;
  for (auto n : sizes) {
    std::vector<std::size_t> d(n);
    std::iota(d.begin(), d.end(), 0);
    e.sets.push_back(std::move(d));
  }
  e.s = s;
  e.c = c;
  e.m = m;
  return e;
}

const std::vector<std::size_t>& Exhaustion::set(std::size_t k) const {
  if (k >= sets.size()) throw InvalidArgument("exhaustion index " + std::to_string(k) + " out of range");
  return sets[k];
}

std::vector<char> Exhaustion::indicator(std::size_t k, std::size_t n_states) const {
  std::vector<char> in(n_states, 0);
  for (auto x : set(k)) in.at(x) = 1;
  return in;
}

std::vector<std::size_t> Exhaustion::complement(std::size_t k, std::size_t n_states) const {
  auto in = indicator(k, n_states);
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < n_states; ++x)
    if (!in[x]) out.push_back(x);
  return out;
}

bool Exhaustion::contains(std::size_t k, std::size_t state) const {
  const auto& d = set(k);
  return std::find(d.begin(), d.end(), state) != d.end();
}

void Exhaustion::validate(std::size_t n_states) const {
  if (sets.empty()) throw InvalidArgument("exhaustion has no sets");
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (sets[k].empty()) throw InvalidArgument("exhaustion set " + std::to_string(k) + " is empty");
    auto in = indicator(k, n_states);
    if (static_cast<std::size_t>(std::count(in.begin(), in.end(), 1)) != sets[k].size())
      throw InvalidArgument("exhaustion set " + std::to_string(k) + " has duplicates");
    if (k > 0) {
      auto prev = indicator(k - 1, n_states);
      for (std::size_t x = 0; x < n_states; ++x)
        if (prev[x] && !in[x]) throw InvalidArgument("exhaustion is not increasing at set " + std::to_string(k));
      if (sets[k].size() == sets[k - 1].size())
        throw InvalidArgument("exhaustion inclusion is not strict at set " + std::to_string(k));
    }
  }
  if (sets.back().size() != n_states) throw InvalidArgument("last exhaustion set must be the whole state space");
  for (auto idx : {s, c, m})
    if (idx >= sets.size()) throw InvalidArgument("special exhaustion index out of range");
  for (auto x : sets[s])
    if (!contains(m, x)) throw InvalidArgument("survival core D_s must lie in D_m");
}

}  // namespace qsd
