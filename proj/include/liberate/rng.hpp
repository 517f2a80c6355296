// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic randomness. All sampling goes through hand-rolled adapters
// over std::mt19937_64 because the std distribution objects are not
// bit-reproducible across standard library implementations.

#ifndef LIBERATE_RNG_HPP
#define LIBERATE_RNG_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "liberate/sha256.hpp"

namespace liberate {

/// Fans a master seed out to an independent per-module stream seed:
/// first 8 bytes, big-endian, of SHA-256(decimal(base) || 0x1F || tag).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::string preimage = std::to_string(base);
  preimage.push_back('\x1f');
  preimage.append(tag);
  Digest d = Sha256::hash(preimage.data(), preimage.size());
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[i];
  return out;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1): ((x >> 11) + 0.5) / 2^53.
  /// Never returns 0 or 1, so log(1 - 2|u - 1/2|) below stays finite.
  double uniform01_open() {
    const double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
  }

  /// Uniform on [lo, hi).
  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform01_open();
  }

  /// Uniform integer in [0, bound) via bitmask rejection. bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = ~std::uint64_t{0} >> countl_zero_(bound - 1);
    for (;;) {
      std::uint64_t v = engine_() & mask;
      if (v < bound) return v;
    }
  }

  /// Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static int countl_zero_(std::uint64_t x) {
    int n = 0;
    for (std::uint64_t probe = std::uint64_t{1} << 63; probe != 0 && !(x & probe);
         probe >>= 1)
      ++n;
    return n;
  }

  std::mt19937_64 engine_;
};

}  // namespace liberate

#endif  // LIBERATE_RNG_HPP
