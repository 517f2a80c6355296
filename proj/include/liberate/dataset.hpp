// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Ratings ingestion and desk-scale subsetting. Source ids are densified in
// ascending source order, so "ascending id" tie-breaks downstream coincide
// with ascending original ids.

#ifndef LIBERATE_DATASET_HPP
#define LIBERATE_DATASET_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liberate/errors.hpp"
#include "liberate/rng.hpp"

namespace liberate {

struct Rating {
  int user_id;
  int item_id;
  double value;  // in [0, 5]
};

/// Ratings grouped by user. Each per-user list is sorted by ascending
/// item id and holds no duplicate items.
struct RatingStore {
  int m = 0;  // user count
  int n = 0;  // item count
  std::vector<std::vector<std::pair<int, double>>> by_user;

  std::size_t total_ratings() const {
    std::size_t sum = 0;
    for (const auto& shard : by_user) sum += shard.size();
    return sum;
  }
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

enum class RatingsFormat { dat, csv };

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = line.find(sep, pos);
    if (hit == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, hit - pos));
    pos = hit + sep.size();
  }
}

inline bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !s.empty();
}

inline bool parse_f64(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !s.empty();
}

inline bool blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace detail

/// Verifies the structural invariants; throws IntegrityError on violation.
inline void check_store(const RatingStore& store) {
  if (static_cast<int>(store.by_user.size()) != store.m)
    throw IntegrityError("user list size disagrees with m");
  for (int u = 0; u < store.m; ++u) {
    int prev = -1;
    for (const auto& [item, value] : store.by_user[u]) {
      if (item < 0 || item >= store.n) throw IntegrityError("item id out of range");
      if (item <= prev) throw IntegrityError("per-user items not strictly ascending");
      if (value < 0.0 || value > 5.0) throw IntegrityError("rating outside [0,5]");
      prev = item;
    }
  }
}

/// Parses `user::item::rating::timestamp` (dat) or `user,item,rating[,ts]`
/// (csv) lines into a store with dense 0-based ids. A csv header line is
/// tolerated only as the first line.
inline RatingStore load_movielens(const std::string& path, RatingsFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);

  const std::string sep = format == RatingsFormat::dat ? "::" : ",";
  std::vector<std::tuple<std::int64_t, std::int64_t, double>> raw;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::blank(line)) continue;
    auto fields = detail::split_fields(line, sep);
    std::size_t want_min = format == RatingsFormat::dat ? 4 : 3;
    std::size_t want_max = 4;
    if (fields.size() < want_min || fields.size() > want_max)
      throw ParseError("expected " + std::to_string(want_min) + " fields", line_no);
    std::int64_t user = 0, item = 0;
    double value = 0.0;
    if (!detail::parse_i64(fields[0], user) || !detail::parse_i64(fields[1], item) ||
        !detail::parse_f64(fields[2], value)) {
      if (line_no == 1 && format == RatingsFormat::csv) continue;  // header
      throw ParseError("malformed record", line_no);
    }
    if (value < 0.0 || value > 5.0)
      throw std::out_of_range("line " + std::to_string(line_no) +
                              ": rating outside [0,5]");
    if (!seen.insert({user, item}).second)
      throw ConflictError("line " + std::to_string(line_no) +
                          ": duplicate (user,item) pair");
    raw.emplace_back(user, item, value);
  }

  std::map<std::int64_t, int> user_index, item_index;
  for (const auto& [user, item, value] : raw) {
    user_index.emplace(user, 0);
    item_index.emplace(item, 0);
  }
  int next = 0;
  for (auto& [id, dense] : user_index) dense = next++;
  next = 0;
  for (auto& [id, dense] : item_index) dense = next++;

  RatingStore store;
  store.m = static_cast<int>(user_index.size());
  store.n = static_cast<int>(item_index.size());
  store.by_user.resize(store.m);
  for (const auto& [user, item, value] : raw)
    store.by_user[user_index[user]].emplace_back(item_index[item], value);
  for (auto& shard : store.by_user)
    std::sort(shard.begin(), shard.end());
  check_store(store);
  return store;
}

/// Restricts to the k_users most-active users and k_items most-rated items,
/// ties broken by ascending id, then re-densifies preserving id order.
/// Selected users keep their slot even if the item restriction empties
/// their shard, so the result always has exactly k_users rows.
inline RatingStore subset_top(const RatingStore& store, int k_users, int k_items) {
  if (k_users < 1 || k_users > store.m || k_items < 1 || k_items > store.n)
    throw std::invalid_argument("subset size out of range");

  std::vector<std::pair<std::size_t, int>> activity(store.m);
  for (int u = 0; u < store.m; ++u)
    activity[u] = {store.by_user[u].size(), u};
  std::sort(activity.begin(), activity.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  std::vector<std::size_t> item_count(store.n, 0);
  for (const auto& shard : store.by_user)
    for (const auto& [item, value] : shard) ++item_count[item];
  std::vector<std::pair<std::size_t, int>> popularity(store.n);
  for (int j = 0; j < store.n; ++j) popularity[j] = {item_count[j], j};
  std::sort(popularity.begin(), popularity.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  std::vector<int> users, items;
  for (int i = 0; i < k_users; ++i) users.push_back(activity[i].second);
  for (int i = 0; i < k_items; ++i) items.push_back(popularity[i].second);
  std::sort(users.begin(), users.end());
  std::sort(items.begin(), items.end());

  std::vector<int> item_map(store.n, -1);
  for (int j = 0; j < k_items; ++j) item_map[items[j]] = j;

  RatingStore out;
  out.m = k_users;
  out.n = k_items;
  out.by_user.resize(k_users);
  for (int u = 0; u < k_users; ++u) {
    for (const auto& [item, value] : store.by_user[users[u]])
      if (item_map[item] >= 0) out.by_user[u].emplace_back(item_map[item], value);
  }
  return out;
}

/// Per-user random partition. Train keeps floor(fraction * count) ratings,
/// at least 1; users with fewer than 2 ratings go to train whole. Both
/// halves keep the full (m, n) index space.
inline std::pair<RatingStore, RatingStore> split(const RatingStore& store,
                                                 const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0) || spec.train_fraction > 1.0)
    throw std::invalid_argument("train_fraction outside (0,1]");

  RatingStore train, test;
  train.m = test.m = store.m;
  train.n = test.n = store.n;
  train.by_user.resize(store.m);
  test.by_user.resize(store.m);

  Rng rng(derive_seed(spec.seed, "split"));
  for (int u = 0; u < store.m; ++u) {
    auto shard = store.by_user[u];
    if (shard.size() < 2) {
      train.by_user[u] = std::move(shard);
      continue;
    }
    rng.shuffle(shard);
    // Nudge before truncating so an exact product is not pushed below its
    // integer by binary rounding (0.3 * 10 = 2.999...).
    auto keep = static_cast<std::size_t>(
        spec.train_fraction * static_cast<double>(shard.size()) + 1e-9);
    keep = std::max<std::size_t>(1, std::min(keep, shard.size()));
    train.by_user[u].assign(shard.begin(), shard.begin() + keep);
    test.by_user[u].assign(shard.begin() + keep, shard.end());
    std::sort(train.by_user[u].begin(), train.by_user[u].end());
    std::sort(test.by_user[u].begin(), test.by_user[u].end());
  }
  return {std::move(train), std::move(test)};
}

}  // namespace liberate

#endif  // LIBERATE_DATASET_HPP
