// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Evaluation: RMSE over held-out pairs and per-user NDCG over each user's
// test items, ranked by predicted rating. Ties rank by ascending item id,
// so evaluation is seed-free.

#ifndef LIBERATE_METRICS_HPP
#define LIBERATE_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "liberate/dataset.hpp"
#include "liberate/mf_core.hpp"

namespace liberate {

inline double rmse(const std::vector<double>& truth, const std::vector<double>& pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("length mismatch");
  if (truth.empty()) throw std::domain_error("rmse undefined on empty lists");
  double sq = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    double d = truth[i] - pred[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(truth.size()));
}

/// Discounted cumulative gain with 1-based positions: sum rel_i / log2(i+1).
inline double dcg(const std::vector<double>& relevances) {
  if (relevances.empty()) throw std::domain_error("dcg undefined on empty list");
  double sum = 0.0;
  for (std::size_t i = 0; i < relevances.size(); ++i)
    sum += relevances[i] / std::log2(static_cast<double>(i) + 2.0);
  return sum;
}

/// DCG of the delivered order divided by DCG of the same multiset sorted
/// descending. An all-zero list has no ranking error, so iDCG = 0 maps to 1.
inline double ndcg(const std::vector<double>& predicted_order_relevances) {
  double raw = dcg(predicted_order_relevances);
  std::vector<double> ideal = predicted_order_relevances;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double best = dcg(ideal);
  if (best == 0.0) return 1.0;
  return raw / best;
}

/// One user's test items ordered by predicted rating descending, ties by
/// ascending item id, with the true ratings aligned to that order.
struct RankedList {
  std::vector<int> items;
  std::vector<double> relevances;
};

inline RankedList make_ranked_list(const Vec& u, const Mat& V,
                                   const std::vector<std::pair<int, double>>& test_items) {
  struct Entry {
    double score;
    int item;
    double truth;
  };
  std::vector<Entry> entries;
  entries.reserve(test_items.size());
  for (const auto& [item, value] : test_items)
    entries.push_back({predict(u, V[item]), item, value});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.score != b.score ? a.score > b.score : a.item < b.item;
  });
  RankedList out;
  for (const auto& e : entries) {
    out.items.push_back(e.item);
    out.relevances.push_back(e.truth);
  }
  return out;
}

struct EvalResult {
  double rmse = 0.0;
  double mean_ndcg = 1.0;
};

/// RMSE over every held-out pair; NDCG per user over that user's test
/// items, averaged across users holding at least 2 of them. With no such
/// user the mean stays at the degenerate 1.0.
inline EvalResult evaluate(const Mat& U, const Mat& V, const RatingStore& test) {
  if (test.total_ratings() == 0) throw std::domain_error("empty test store");
  double sq = 0.0;
  std::size_t count = 0;
  double ndcg_sum = 0.0;
  std::size_t ndcg_users = 0;
  for (int u = 0; u < test.m; ++u) {
    const auto& shard = test.by_user[u];
    for (const auto& [item, value] : shard) {
      double d = value - predict(U[u], V[item]);
      sq += d * d;
      ++count;
    }
    if (shard.size() >= 2) {
      ndcg_sum += ndcg(make_ranked_list(U[u], V, shard).relevances);
      ++ndcg_users;
    }
  }
  EvalResult out;
  out.rmse = std::sqrt(sq / static_cast<double>(count));
  if (ndcg_users > 0) out.mean_ndcg = ndcg_sum / static_cast<double>(ndcg_users);
  return out;
}

}  // namespace liberate

#endif  // LIBERATE_METRICS_HPP
