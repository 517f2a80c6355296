// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "liberate/sharing.hpp"
#include "liberate/synthetic.hpp"

using namespace liberate;

namespace {

RatingStore demo_store() {
  RatingStore store;
  store.m = 4;
  store.n = 6;
  store.by_user = {
      {{0, 5.0}, {1, 4.0}, {2, 3.0}},
      {{1, 2.0}, {3, 5.0}},
      {{0, 1.0}, {2, 2.0}, {4, 4.0}, {5, 3.0}},
      {{3, 3.0}, {5, 5.0}},
  };
  return store;
}

std::set<std::pair<int, int>> share_pairs(const std::vector<ShareRecord>& records) {
  std::set<std::pair<int, int>> out;  // (item, donor)
  for (const auto& rec : records)
    for (const auto& [item, value] : rec.items)
      out.insert({item, rec.source_user});
  return out;
}

}  // namespace

TEST_CASE("pool groups train ratings by item with donors ascending", "[sharing]") {
  RatingPool pool = build_pool(demo_store());
  REQUIRE(pool.size() == 6);
  REQUIRE(pool[0] == std::vector<std::pair<int, double>>{{0, 5.0}, {2, 1.0}});
  REQUIRE(pool[5] == std::vector<std::pair<int, double>>{{2, 3.0}, {3, 5.0}});
}

TEST_CASE("share volume is the rounded-up fraction of the shard", "[sharing]") {
  RatingStore store = demo_store();
  RatingPool pool = build_pool(store);
  SharePlan plan;
  plan.fraction = 0.5;
  Rng rng(1);
  // receiver 1 holds 2 ratings: ceil(0.5 * 2) = 1 donated rating
  auto records = sample_shares(1, store, pool, plan, rng);
  std::size_t total = 0;
  for (const auto& rec : records) total += rec.items.size();
  REQUIRE(total == 1);
}

TEST_CASE("an exact fraction product is not pushed past its integer", "[sharing]") {
  RatingStore store;
  store.m = 2;
  store.n = 40;
  store.by_user.resize(2);
  for (int j = 0; j < 10; ++j) store.by_user[0].emplace_back(j, 3.0);
  for (int j = 10; j < 40; ++j) store.by_user[1].emplace_back(j, 4.0);
  RatingPool pool = build_pool(store);
  SharePlan plan;
  plan.fraction = 0.3;  // ceil(0.3 * 10) must be 3, not 4
  Rng rng(2);
  auto records = sample_shares(0, store, pool, plan, rng);
  std::size_t total = 0;
  for (const auto& rec : records) total += rec.items.size();
  REQUIRE(total == 3);
}

TEST_CASE("zero fraction shares nothing", "[sharing]") {
  RatingStore store = demo_store();
  RatingPool pool = build_pool(store);
  SharePlan plan;
  plan.fraction = 0.0;
  Rng rng(3);
  REQUIRE(sample_shares(0, store, pool, plan, rng).empty());
}

TEST_CASE("shares avoid rated items, self-donation, and duplicates", "[sharing]") {
  RatingStore store = demo_store();
  RatingPool pool = build_pool(store);
  SharePlan plan;
  plan.fraction = 1.0;
  for (int receiver = 0; receiver < store.m; ++receiver) {
    Rng rng(17 + receiver);
    auto records = sample_shares(receiver, store, pool, plan, rng);
    std::set<int> rated;
    for (const auto& [item, value] : store.by_user[receiver]) rated.insert(item);
    std::set<int> delivered;
    for (const auto& rec : records) {
      REQUIRE(rec.receiver_user == receiver);
      REQUIRE(rec.source_user != receiver);
      REQUIRE_FALSE(rec.items.empty());
      REQUIRE(std::is_sorted(rec.items.begin(), rec.items.end()));
      for (const auto& [item, value] : rec.items) {
        REQUIRE(rated.count(item) == 0);
        REQUIRE(delivered.insert(item).second);  // at most one donor per item
        // the donated value is the donor's own train rating
        const auto& donor_shard = store.by_user[rec.source_user];
        auto hit = std::find(donor_shard.begin(), donor_shard.end(),
                             std::make_pair(item, value));
        REQUIRE(hit != donor_shard.end());
      }
    }
  }
}

TEST_CASE("smaller fractions draw a prefix of larger ones", "[sharing]") {
  SyntheticSpec spec;
  RatingStore store = generate_ratings(spec, 11);
  RatingStore sub = subset_top(store, 10, 40);
  RatingPool pool = build_pool(sub);
  for (int receiver = 0; receiver < 4; ++receiver) {
    std::set<std::pair<int, int>> prev;
    for (double fraction : {0.1, 0.2, 0.3}) {
      SharePlan plan;
      plan.fraction = fraction;
      Rng rng(derive_seed(11, "share:" + std::to_string(receiver)));
      auto pairs = share_pairs(sample_shares(receiver, sub, pool, plan, rng));
      REQUIRE(std::includes(pairs.begin(), pairs.end(), prev.begin(), prev.end()));
      prev = std::move(pairs);
    }
  }
}

TEST_CASE("sampling is seed-deterministic", "[sharing]") {
  SyntheticSpec spec;
  RatingStore store = generate_ratings(spec, 11);
  RatingStore sub = subset_top(store, 10, 40);
  RatingPool pool = build_pool(sub);
  SharePlan plan;
  plan.fraction = 0.3;
  Rng a(5), b(5), c(6);
  auto ra = sample_shares(2, sub, pool, plan, a);
  auto rb = sample_shares(2, sub, pool, plan, b);
  auto rc = sample_shares(2, sub, pool, plan, c);
  REQUIRE(share_pairs(ra) == share_pairs(rb));
  // a different stream may coincide on tiny pools, not on this one
  REQUIRE(share_pairs(ra) != share_pairs(rc));
}

TEST_CASE("sampling rejects bad receivers", "[sharing]") {
  RatingStore store = demo_store();
  store.by_user[1].clear();
  RatingPool pool = build_pool(store);
  SharePlan plan;
  Rng rng(1);
  REQUIRE_THROWS_AS(sample_shares(-1, store, pool, plan, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sample_shares(4, store, pool, plan, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sample_shares(1, store, pool, plan, rng), std::domain_error);
}

TEST_CASE("share plan validates its fraction", "[sharing]") {
  SharePlan plan;
  plan.fraction = -0.1;
  REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
  plan.fraction = 1.1;
  REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
  plan.fraction = 1.0;
  REQUIRE_NOTHROW(plan.validate());
}

TEST_CASE("applying shares grows receivers and leaves donors alone", "[sharing]") {
  RatingStore store = demo_store();
  std::vector<ShareRecord> records(1);
  records[0].source_user = 2;
  records[0].receiver_user = 1;
  records[0].items = {{4, 4.0}, {5, 3.0}};
  RatingStore out = apply_shares(store, records);
  REQUIRE(out.by_user[1] ==
          std::vector<std::pair<int, double>>{{1, 2.0}, {3, 5.0}, {4, 4.0}, {5, 3.0}});
  REQUIRE(out.by_user[2] == store.by_user[2]);
  REQUIRE(out.by_user[0] == store.by_user[0]);
  // the input store is untouched
  REQUIRE(store.by_user[1].size() == 2);
}

TEST_CASE("expansion matches the rounded-up target size", "[sharing]") {
  SyntheticSpec spec;
  RatingStore store = generate_ratings(spec, 4);
  RatingStore sub = subset_top(store, 10, 40);
  RatingPool pool = build_pool(sub);
  SharePlan plan;
  plan.fraction = 0.3;
  for (int receiver = 0; receiver < sub.m; ++receiver) {
    if (sub.by_user[receiver].empty()) continue;
    Rng rng(derive_seed(4, "share:" + std::to_string(receiver)));
    auto records = sample_shares(receiver, sub, pool, plan, rng);
    RatingStore grown = apply_shares(sub, records);
    std::size_t s = sub.by_user[receiver].size();
    auto k = static_cast<std::size_t>(std::ceil(plan.fraction * double(s) - 1e-9));
    std::set<int> rated;
    for (const auto& [item, value] : sub.by_user[receiver]) rated.insert(item);
    std::size_t eligible_items = 0;
    for (const auto& [item, donors] : pool) {
      if (rated.count(item)) continue;
      for (const auto& [donor, value] : donors)
        if (donor != receiver) {
          ++eligible_items;
          break;
        }
    }
    REQUIRE(grown.by_user[receiver].size() == s + std::min(k, eligible_items));
  }
}

TEST_CASE("conflicting share records are rejected by name", "[sharing]") {
  RatingStore store = demo_store();

  std::vector<ShareRecord> dup(2);
  dup[0].source_user = 0;
  dup[0].receiver_user = 1;
  dup[0].items = {{2, 3.0}};
  dup[1].source_user = 2;
  dup[1].receiver_user = 1;
  dup[1].items = {{2, 2.0}};
  try {
    apply_shares(store, dup);
    FAIL("expected a conflict");
  } catch (const ConflictError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("records 0 and 1") != std::string::npos);
    REQUIRE(msg.find("item 2") != std::string::npos);
  }

  std::vector<ShareRecord> rated(1);
  rated[0].source_user = 0;
  rated[0].receiver_user = 1;
  rated[0].items = {{3, 1.0}};  // receiver 1 already rated item 3
  try {
    apply_shares(store, rated);
    FAIL("expected a conflict");
  } catch (const ConflictError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("record 0") != std::string::npos);
    REQUIRE(msg.find("already rated item 3") != std::string::npos);
  }
}

TEST_CASE("malformed share records are rejected", "[sharing]") {
  RatingStore store = demo_store();
  std::vector<ShareRecord> recs(1);

  recs[0].source_user = 1;
  recs[0].receiver_user = 1;
  recs[0].items = {{0, 1.0}};
  REQUIRE_THROWS_AS(apply_shares(store, recs), std::invalid_argument);

  recs[0].source_user = 0;
  recs[0].receiver_user = 9;
  REQUIRE_THROWS_AS(apply_shares(store, recs), std::invalid_argument);

  recs[0].receiver_user = 1;
  recs[0].items = {};
  REQUIRE_THROWS_AS(apply_shares(store, recs), std::invalid_argument);

  recs[0].items = {{99, 1.0}};
  REQUIRE_THROWS_AS(apply_shares(store, recs), std::invalid_argument);
}
