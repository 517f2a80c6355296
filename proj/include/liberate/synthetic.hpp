// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic ratings with MovieLens-like shape: power-decayed user activity
// and item popularity, low-rank structure plus biases and bounded noise,
// integer ratings in [1,5]. Stands in for real data in offline runs.

#ifndef LIBERATE_SYNTHETIC_HPP
#define LIBERATE_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "liberate/dataset.hpp"
#include "liberate/errors.hpp"
#include "liberate/rng.hpp"

namespace liberate {

struct SyntheticSpec {
  int users = 60;
  int items = 160;
  int latent = 4;
  double mean = 3.4;
  double user_activity_tau = 0.5;    // e-folding of activity, fraction of users
  double item_popularity_tau = 0.3;  // e-folding of popularity, fraction of items
  double core_density = 0.45;        // rating probability at the densest cell
  double latent_scale = 0.30;
  double user_bias_scale = 0.10;  // taste differences stay mild, so one user's
  double item_bias_scale = 1.3;   // rating is informative for another
  double noise_sd = 0.70;
};

/// Deterministic generator. Every user ends with at least 2 ratings and
/// every item with at least 1, so a write/reload round-trip preserves ids.
inline RatingStore generate_ratings(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.users < 2 || spec.items < 2 || spec.latent < 1)
    throw std::invalid_argument("synthetic shape too small");

  Rng rng(derive_seed(seed, "synthetic"));

  std::vector<std::vector<double>> a(spec.users, std::vector<double>(spec.latent));
  std::vector<std::vector<double>> b(spec.items, std::vector<double>(spec.latent));
  std::vector<double> bias_u(spec.users), bias_j(spec.items);
  for (auto& row : a)
    for (auto& x : row) x = rng.uniform_real(-spec.latent_scale, spec.latent_scale);
  for (auto& row : b)
    for (auto& x : row) x = rng.uniform_real(-spec.latent_scale, spec.latent_scale);
  for (auto& x : bias_u)
    x = rng.uniform_real(-spec.user_bias_scale, spec.user_bias_scale);
  for (auto& x : bias_j)
    x = rng.uniform_real(-spec.item_bias_scale, spec.item_bias_scale);

  // Irwin-Hall(12) recentred: mean 0, variance 1, support [-6, 6].
  auto noise = [&rng]() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += rng.uniform01_open();
    return s - 6.0;
  };
  auto draw_value = [&](int u, int j) {
    double dot = 0.0;
    for (int k = 0; k < spec.latent; ++k) dot += a[u][k] * b[j][k];
    double raw = spec.mean + bias_u[u] + bias_j[j] + dot + spec.noise_sd * noise();
    return static_cast<double>(std::clamp<long>(std::lround(raw), 1, 5));
  };

  double tau_u = spec.user_activity_tau * spec.users;
  double tau_j = spec.item_popularity_tau * spec.items;
  RatingStore store;
  store.m = spec.users;
  store.n = spec.items;
  store.by_user.resize(spec.users);
  std::vector<int> item_hits(spec.items, 0);
  for (int u = 0; u < spec.users; ++u) {
    double wu = std::exp(-u / tau_u);
    for (int j = 0; j < spec.items; ++j) {
      double p = spec.core_density * wu * std::exp(-j / tau_j);
      if (rng.uniform01_open() < p) {
        store.by_user[u].emplace_back(j, draw_value(u, j));
        ++item_hits[j];
      }
    }
  }

  // Patch sparse corners so downstream invariants hold everywhere.
  for (int u = 0; u < spec.users; ++u) {
    for (int j = 0; store.by_user[u].size() < 2 && j < spec.items; ++j) {
      auto& shard = store.by_user[u];
      bool rated = std::any_of(shard.begin(), shard.end(),
                               [j](const auto& r) { return r.first == j; });
      if (!rated) {
        shard.emplace_back(j, draw_value(u, j));
        ++item_hits[j];
      }
    }
    std::sort(store.by_user[u].begin(), store.by_user[u].end());
  }
  for (int j = 0; j < spec.items; ++j) {
    if (item_hits[j] == 0) {
      store.by_user[0].emplace_back(j, draw_value(0, j));
      item_hits[j] = 1;
    }
  }
  std::sort(store.by_user[0].begin(), store.by_user[0].end());
  check_store(store);
  return store;
}

/// Writes `user::item::rating::timestamp` lines with 1-based ids, in user
/// then item order, timestamps strictly increasing.
inline void write_movielens_dat(const RatingStore& store, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path, 0);
  long ts = 978300000;
  for (int u = 0; u < store.m; ++u) {
    for (const auto& [item, value] : store.by_user[u]) {
      out << (u + 1) << "::" << (item + 1) << "::";
      if (value == std::floor(value))
        out << static_cast<long>(value);
      else
        out << value;
      out << "::" << ts++ << "\n";
    }
  }
  if (!out) throw ParseError("short write to " + path, 0);
}

}  // namespace liberate

#endif  // LIBERATE_SYNTHETIC_HPP
