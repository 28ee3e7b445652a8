#pragma once

#include <cstdint>
#include <vector>

#include "bnpreg/rng.hpp"

namespace bnpreg::testsupport {

/// Runs body(rng, case_index) for `cases` independently seeded cases.
template <class Body>
void for_all(int cases, std::uint64_t seed, Body&& body) {
  for (int c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    body(rng, c);
  }
}

inline std::vector<double> random_vector(Rng& rng, std::size_t size, double scale = 1.0) {
  std::vector<double> v(size);
  for (double& x : v) x = scale * standard_normal(rng);
  return v;
}

inline int random_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace bnpreg::testsupport
