// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace stsim {

// Deterministic PRNG (splitmix64). Implemented here rather than via
// <random> distributions so that streams are reproducible across
// standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [lo, hi], inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(next_u64());  // full range
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<int64_t>(v % range);
  }

  // Uniform real in [a, b).
  double uniform_real(double a, double b) {
    double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
  }

 private:
  uint64_t state_;
};

// Named substream derivation: mixes a master seed with a label and up to
// three numeric parameters, so adding new streams never perturbs existing
// ones.
inline uint64_t derive_seed(uint64_t master, std::string_view label,
                            uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
  uint64_t h = 0xcbf29ce484222325ULL ^ master;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  };
  for (char ch : label) mix(static_cast<unsigned char>(ch));
  mix(a);
  mix(b);
  mix(c);
  // final avalanche
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

inline Rng substream(uint64_t master, std::string_view label, uint64_t a = 0,
                     uint64_t b = 0, uint64_t c = 0) {
  return Rng(derive_seed(master, label, a, b, c));
}

}  // namespace stsim
