// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Pre-training data sharing: pool every train rating by item, then grow
// each client's shard with donated ratings for items it has not rated.
// At most one rating per item reaches a receiver, donors stay attributed.

#ifndef LIBERATE_SHARING_HPP
#define LIBERATE_SHARING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liberate/dataset.hpp"
#include "liberate/errors.hpp"
#include "liberate/rng.hpp"

namespace liberate {

struct ShareRecord {
  int source_user = -1;
  int receiver_user = -1;
  int round = 0;  // sharing happens once, before training
  std::vector<std::pair<int, double>> items;
  std::int64_t timestamp_ms = 0;
};

struct SharePlan {
  double fraction = 0.30;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(fraction >= 0.0) || fraction > 1.0)
      throw std::invalid_argument("share fraction outside [0,1]");
  }
};

/// item id -> (donor, value), donors ascending. Covers exactly the train set.
using RatingPool = std::map<int, std::vector<std::pair<int, double>>>;

inline RatingPool build_pool(const RatingStore& train) {
  RatingPool pool;
  for (int u = 0; u < train.m; ++u)
    for (const auto& [item, value] : train.by_user[u])
      pool[item].emplace_back(u, value);
  return pool;
}

/// Draws k = ceil(fraction * |shard|) donated ratings for the receiver,
/// uniformly over eligible (item, donor) pairs with at most one per item,
/// then groups them into one record per donor. Runs out of eligible pairs
/// before k: takes what there is.
inline std::vector<ShareRecord> sample_shares(int receiver, const RatingStore& train,
                                              const RatingPool& pool,
                                              const SharePlan& plan, Rng& rng) {
  plan.validate();
  if (receiver < 0 || receiver >= train.m)
    throw std::invalid_argument("receiver out of range");
  const auto& shard = train.by_user[receiver];
  if (shard.empty()) throw std::domain_error("receiver has no local ratings");

  // Nudge before ceil so an exact product is not pushed past its integer.
  auto k = static_cast<std::size_t>(std::ceil(
      plan.fraction * static_cast<double>(shard.size()) - 1e-9));
  if (k == 0) return {};

  std::set<int> rated;
  for (const auto& [item, value] : shard) rated.insert(item);

  struct Candidate {
    int item;
    int donor;
    double value;
  };
  std::vector<Candidate> eligible;
  for (const auto& [item, donors] : pool) {
    if (rated.count(item)) continue;
    for (const auto& [donor, value] : donors)
      if (donor != receiver) eligible.push_back({item, donor, value});
  }
  rng.shuffle(eligible);

  std::set<int> taken_items;
  std::map<int, std::vector<std::pair<int, double>>> by_donor;
  std::size_t taken = 0;
  for (const auto& cand : eligible) {
    if (taken == k) break;
    if (!taken_items.insert(cand.item).second) continue;
    by_donor[cand.donor].emplace_back(cand.item, cand.value);
    ++taken;
  }

  std::vector<ShareRecord> out;
  for (auto& [donor, items] : by_donor) {
    std::sort(items.begin(), items.end());
    ShareRecord rec;
    rec.source_user = donor;
    rec.receiver_user = receiver;
    rec.items = std::move(items);
    out.push_back(std::move(rec));
  }
  return out;
}

/// Extends receiver shards with the shared ratings. Donor shards are never
/// touched. Collisions name the offending records by their list positions.
inline RatingStore apply_shares(const RatingStore& train,
                                const std::vector<ShareRecord>& records) {
  RatingStore out = train;
  // (receiver, item) -> index of the record that delivered it
  std::map<std::pair<int, int>, std::size_t> delivered;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.source_user == rec.receiver_user)
      throw std::invalid_argument("record " + std::to_string(r) +
                                  ": source equals receiver");
    if (rec.receiver_user < 0 || rec.receiver_user >= out.m ||
        rec.source_user < 0 || rec.source_user >= out.m)
      throw std::invalid_argument("record " + std::to_string(r) +
                                  ": user out of range");
    if (rec.items.empty())
      throw std::invalid_argument("record " + std::to_string(r) + ": no items");
    auto& shard = out.by_user[rec.receiver_user];
    for (const auto& [item, value] : rec.items) {
      if (item < 0 || item >= out.n)
        throw std::invalid_argument("record " + std::to_string(r) +
                                    ": item out of range");
      bool already = std::any_of(shard.begin(), shard.end(),
                                 [item](const auto& p) { return p.first == item; });
      auto key = std::make_pair(rec.receiver_user, item);
      auto hit = delivered.find(key);
      if (hit != delivered.end())
        throw ConflictError("records " + std::to_string(hit->second) + " and " +
                            std::to_string(r) + " both share item " +
                            std::to_string(item) + " with user " +
                            std::to_string(rec.receiver_user));
      if (already)
        throw ConflictError("record " + std::to_string(r) + ": user " +
                            std::to_string(rec.receiver_user) +
                            " already rated item " + std::to_string(item));
      delivered.emplace(key, r);
      shard.emplace_back(item, value);
    }
    std::sort(shard.begin(), shard.end());
  }
  return out;
}

}  // namespace liberate

#endif  // LIBERATE_SHARING_HPP
