#pragma once

#include <cstddef>
#include <vector>

namespace qsd {

// Increasing chain D_0 c D_1 c ... c D_{K-1} = all states, with the survival
// core D_s, coupling domain D_c and mixing enclosure D_m given by index.
struct Exhaustion {
  std::vector<std::vector<std::size_t>> sets;
  std::size_t s = 0;
  std::size_t c = 0;
  std::size_t m = 0;

  // D_k = {0, ..., sizes[k] - 1}.
  static Exhaustion prefix(std::vector<std::size_t> sizes, std::size_t s, std::size_t c, std::size_t m);

  std::size_t count() const { return sets.size(); }
  std::size_t last() const { return sets.size() - 1; }
  const std::vector<std::size_t>& set(std::size_t k) const;
  std::vector<std::size_t> complement(std::size_t k, std::size_t n_states) const;
  std::vector<char> indicator(std::size_t k, std::size_t n_states) const;
  bool contains(std::size_t k, std::size_t state) const;

  // Throws InvalidArgument unless the chain is strictly increasing and covers n_states.
  void validate(std::size_t n_states) const;
};

}  // namespace qsd
