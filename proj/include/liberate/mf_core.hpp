// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Matrix-factorization math: dot-product prediction, regularised squared
// loss, client-side gradients, and plain SGD steps. Gradients are of the
// unnormalized squared-error sum; the 1/M factor enters reporting only.

#ifndef LIBERATE_MF_CORE_HPP
#define LIBERATE_MF_CORE_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "liberate/dataset.hpp"
#include "liberate/errors.hpp"
#include "liberate/rng.hpp"

namespace liberate {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

struct Hyperparams {
  double gamma = 1e-3;   // learning rate
  double lambda = 1e-4;  // regularization weight
  int latent_dim = 100;
  int iterations = 80;
};

/// Where the +2·lambda·v_j term is applied. `server` keeps it out of client
/// uploads and applies it once per item at aggregation; `client` folds it
/// into every rater's upload (so aggregation over-counts it by design).
enum class RegMode { server, client };

inline RegMode parse_reg_mode(const std::string& s) {
  if (s == "server") return RegMode::server;
  if (s == "client") return RegMode::client;
  throw std::invalid_argument("reg_mode must be server or client");
}

/// One client's upload: per-item gradient contributions plus the gradient
/// for its own profile row (which never leaves the client).
struct ClientGradient {
  std::map<int, Vec> entries;  // item id -> length-l contribution
  Vec user_grad;
};

inline double predict(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("latent length mismatch");
  double dot = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
  return dot;
}

inline double frobenius_sq(const Mat& x) {
  double sum = 0.0;
  for (const auto& row : x)
    for (double v : row) sum += v * v;
  return sum;
}

/// Squared-error sum plus lambda * (|U|^2 + |V|^2), no 1/M. Summation runs
/// ascending user, then ascending item within each shard.
inline double objective_unnormalized(const RatingStore& train, const Mat& U,
                                     const Mat& V, double lambda) {
  double sq = 0.0;
  for (int u = 0; u < train.m; ++u)
    for (const auto& [item, value] : train.by_user[u]) {
      double resid = value - predict(U[u], V[item]);
      sq += resid * resid;
    }
  return sq + lambda * (frobenius_sq(U) + frobenius_sq(V));
}

/// Mean squared error plus the regularizer; errors on an empty store.
inline double objective(const RatingStore& train, const Mat& U, const Mat& V,
                        double lambda) {
  std::size_t M = train.total_ratings();
  if (M == 0) throw std::domain_error("objective undefined for empty store");
  double sq = 0.0;
  for (int u = 0; u < train.m; ++u)
    for (const auto& [item, value] : train.by_user[u]) {
      double resid = value - predict(U[u], V[item]);
      sq += resid * resid;
    }
  return sq / static_cast<double>(M) + lambda * (frobenius_sq(U) + frobenius_sq(V));
}

/// -2 sum_j v_j (r_ij - <u,v_j>) + 2 lambda u, over the client's shard.
inline Vec grad_user(const std::vector<std::pair<int, double>>& shard, const Vec& u,
                     const Mat& V, double lambda) {
  if (shard.empty()) throw std::domain_error("gradient undefined for empty shard");
  Vec g(u.size(), 0.0);
  for (const auto& [item, value] : shard) {
    double resid = value - predict(u, V[item]);
    for (std::size_t k = 0; k < u.size(); ++k) g[k] -= 2.0 * V[item][k] * resid;
  }
  for (std::size_t k = 0; k < u.size(); ++k) g[k] += 2.0 * lambda * u[k];
  return g;
}

/// Per rated item j: -2 u (r_ij - <u,v_j>), plus 2 lambda v_j only in
/// client mode. Entries keyed by item id, ascending.
inline ClientGradient grad_items(const std::vector<std::pair<int, double>>& shard,
                                 const Vec& u, const Mat& V, double lambda,
                                 RegMode reg_mode) {
  if (shard.empty()) throw std::domain_error("gradient undefined for empty shard");
  ClientGradient out;
  for (const auto& [item, value] : shard) {
    double resid = value - predict(u, V[item]);
    Vec g(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
      g[k] = -2.0 * u[k] * resid;
      if (reg_mode == RegMode::client) g[k] += 2.0 * lambda * V[item][k];
    }
    out.entries.emplace(item, std::move(g));
  }
  return out;
}

/// x - gamma * g; rejects non-finite results so divergence surfaces at the
/// first poisoned coordinate instead of propagating.
inline Vec sgd_step(const Vec& x, const Vec& g, double gamma) {
  if (x.size() != g.size()) throw std::invalid_argument("latent length mismatch");
  if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = x[k] - gamma * g[k];
    if (!std::isfinite(out[k]))
      throw NumericError("non-finite parameter after update");
  }
  return out;
}

inline Mat predict_all(const Mat& U, const Mat& V) {
  Mat table(U.size(), Vec(V.size(), 0.0));
  for (std::size_t i = 0; i < U.size(); ++i)
    for (std::size_t j = 0; j < V.size(); ++j) table[i][j] = predict(U[i], V[j]);
  return table;
}

/// Rows i.i.d. uniform on [0, 1/sqrt(l)], filled row-major so fills are
/// reproducible for a given stream.
inline Mat init_factors(int rows, int latent_dim, Rng& rng) {
  if (rows < 0 || latent_dim < 1) throw std::invalid_argument("bad factor shape");
  double hi = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  Mat out(rows, Vec(latent_dim, 0.0));
  for (auto& row : out)
    for (auto& x : row) x = rng.uniform_real(0.0, hi);
  return out;
}

}  // namespace liberate

#endif  // LIBERATE_MF_CORE_HPP
