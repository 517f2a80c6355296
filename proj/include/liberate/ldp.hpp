// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Local differential privacy for uploaded item gradients: clip each
// coordinate to [-C, C], then add Laplace(0, 2C/epsilon) noise. Clipping
// bounds per-coordinate sensitivity at 2C, which calibrates the scale.

#ifndef LIBERATE_LDP_HPP
#define LIBERATE_LDP_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "liberate/mf_core.hpp"
#include "liberate/rng.hpp"

namespace liberate {

struct PrivacyParams {
  bool enabled = false;
  double epsilon = 1.0;
  double clip_bound = 1.0;
  std::uint64_t seed = 0;

  double scale() const { return 2.0 * clip_bound / epsilon; }

  void validate() const {
    if (!enabled) return;
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(clip_bound > 0.0)) throw std::invalid_argument("clip_bound must be > 0");
    if (!std::isfinite(scale())) throw std::invalid_argument("noise scale not finite");
  }
};

inline double clip(double x, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip bound must be > 0");
  return std::min(std::max(x, -c), c);
}

/// Inverse-CDF transform of one uniform draw p in (0,1):
/// sign(p - 1/2) * scale * ln(1 - 2|p - 1/2|). Exactly 0 at p = 1/2.
inline double laplace_from_uniform(double p, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
  double centered = p - 0.5;
  if (centered == 0.0) return 0.0;
  double sign = centered > 0.0 ? 1.0 : -1.0;
  return sign * scale * std::log(1.0 - 2.0 * std::fabs(centered));
}

inline double laplace_sample(double scale, Rng& rng) {
  return laplace_from_uniform(rng.uniform01_open(), scale);
}

/// Clip-then-noise on every item-gradient coordinate. The item id set and
/// vector lengths never change, and user_grad is untouched (it stays on the
/// client). Disabled params are a strict identity, clipping included.
inline ClientGradient perturb_gradient(const ClientGradient& g,
                                       const PrivacyParams& pp, Rng& rng) {
  pp.validate();
  if (!pp.enabled) return g;
  ClientGradient out;
  out.user_grad = g.user_grad;
  double b = pp.scale();
  for (const auto& [item, vec] : g.entries) {
    Vec noisy(vec.size());
    for (std::size_t k = 0; k < vec.size(); ++k)
      noisy[k] = clip(vec[k], pp.clip_bound) + laplace_sample(b, rng);
    out.entries.emplace(item, std::move(noisy));
  }
  return out;
}

}  // namespace liberate

#endif  // LIBERATE_LDP_HPP
