#pragma once

#include <cstdint>
#include <random>

namespace bnpreg {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed addressed by a (master, a, b) counter path. The result depends
/// only on the path, never on how many numbers other streams have consumed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(master ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  return h;
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>{}(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>{}(rng);
}

}  // namespace bnpreg
