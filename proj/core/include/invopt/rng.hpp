#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "invopt/common.hpp"

namespace invopt {

// splitmix64; used to derive independent stream seeds from one master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Deterministic sub-stream seed: base seed, a purpose tag, and an index.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  return mix64(mix64(base ^ fnv1a(tag)) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean = 0.0, double sd = 1.0) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

inline RealVector uniform_in_box(Rng& rng, const Box& box) {
  RealVector x(box.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = uniform(rng, box.low[i], box.high[i]);
  return x;
}

}  // namespace invopt
