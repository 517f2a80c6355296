// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "liberate/metrics.hpp"
#include "liberate/rng.hpp"

using namespace liberate;

TEST_CASE("rmse hand cases", "[metrics]") {
  REQUIRE(rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  REQUIRE(std::fabs(rmse({1.0, 3.0}, {2.0, 4.0}) - 1.0) < 1e-12);
  REQUIRE(std::fabs(rmse({0.0, 0.0}, {3.0, 4.0}) - std::sqrt(12.5)) < 1e-12);
  REQUIRE(std::fabs(rmse({2.0}, {0.0}) - 2.0) < 1e-12);
  REQUIRE_THROWS_AS(rmse({}, {}), std::domain_error);
  REQUIRE_THROWS_AS(rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("rmse detects constant shifts", "[metrics]") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> truth(8), pred(8), shifted(8);
    double c = rng.uniform_real(0.5, 3.0);
    for (int i = 0; i < 8; ++i) {
      truth[i] = rng.uniform_real(0.0, 5.0);
      pred[i] = rng.uniform_real(0.0, 5.0);
      shifted[i] = pred[i] + c;
    }
    double base = rmse(truth, pred);
    REQUIRE(rmse(truth, shifted) >= c - base - 1e-12);
  }
}

TEST_CASE("dcg discounts by log positions", "[metrics]") {
  REQUIRE(dcg({1.0}) == 1.0);
  double expected = 3.0 + 2.0 / std::log2(3.0) + 1.0 / 2.0;
  REQUIRE(std::fabs(dcg({3.0, 2.0, 1.0}) - expected) < 1e-12);
  REQUIRE(std::fabs(dcg({3.0, 2.0, 1.0}) - 4.761859507142915) < 1e-12);
  REQUIRE_THROWS_AS(dcg({}), std::domain_error);
}

TEST_CASE("ndcg of an ideal ordering is exactly one", "[metrics]") {
  REQUIRE(ndcg({5.0, 4.0, 3.0, 2.0}) == 1.0);
  REQUIRE(ndcg({2.0, 2.0, 2.0}) == 1.0);
  REQUIRE(ndcg({4.0}) == 1.0);
  REQUIRE(ndcg({5.0, 5.0, 1.0}) == 1.0);
}

TEST_CASE("ndcg of an all-zero list is one by convention", "[metrics]") {
  REQUIRE(ndcg({0.0, 0.0, 0.0}) == 1.0);
}

TEST_CASE("ndcg of a worst ordering", "[metrics]") {
  double raw = 1.0 + 2.0 / std::log2(3.0) + 3.0 / 2.0;
  double best = 3.0 + 2.0 / std::log2(3.0) + 1.0 / 2.0;
  double got = ndcg({1.0, 2.0, 3.0});
  REQUIRE(std::fabs(got - raw / best) < 1e-9);
  REQUIRE(std::fabs(got - 0.79) < 1e-4);
  REQUIRE(got < 1.0);
}

TEST_CASE("ranked lists sort by prediction with ascending-id ties", "[metrics]") {
  Mat V{{1.0}, {3.0}, {2.0}, {3.0}};
  Vec u{1.0};
  std::vector<std::pair<int, double>> test_items{
      {0, 5.0}, {1, 1.0}, {2, 4.0}, {3, 2.0}};
  RankedList ranked = make_ranked_list(u, V, test_items);
  // scores: item0=1, item1=3, item2=2, item3=3; ties 1 and 3 keep id order
  REQUIRE(ranked.items == std::vector<int>{1, 3, 2, 0});
  REQUIRE(ranked.relevances == std::vector<double>{1.0, 2.0, 4.0, 5.0});
}

TEST_CASE("evaluation aggregates rmse and per-user ndcg", "[metrics]") {
  // factors reproducing the test set exactly: rmse 0, ndcg 1
  RatingStore test;
  test.m = 2;
  test.n = 2;
  test.by_user = {{{0, 2.0}, {1, 4.0}}, {{0, 1.0}}};
  Mat U{{2.0}, {1.0}};
  Mat V{{1.0}, {2.0}};
  EvalResult ev = evaluate(U, V, test);
  REQUIRE(ev.rmse == 0.0);
  REQUIRE(ev.mean_ndcg == 1.0);
}

TEST_CASE("evaluation averages ndcg over users holding two or more test items",
          "[metrics]") {
  RatingStore test;
  test.m = 3;
  test.n = 3;
  // user 0 ranks worst-case, user 1 ranks perfectly, user 2 has one item only
  test.by_user = {{{0, 1.0}, {1, 2.0}, {2, 3.0}},
                  {{0, 3.0}, {1, 2.0}, {2, 1.0}},
                  {{1, 5.0}}};
  Mat U{{1.0}, {1.0}, {1.0}};
  Mat V{{3.0}, {2.0}, {1.0}};
  EvalResult ev = evaluate(U, V, test);
  double worst = ndcg({1.0, 2.0, 3.0});
  REQUIRE(std::fabs(ev.mean_ndcg - (worst + 1.0) / 2.0) < 1e-12);
}

TEST_CASE("evaluation with no rankable user keeps the degenerate mean", "[metrics]") {
  RatingStore test;
  test.m = 2;
  test.n = 2;
  test.by_user = {{{0, 3.0}}, {{1, 4.0}}};
  Mat U{{1.0}, {1.0}};
  Mat V{{0.0}, {0.0}};
  EvalResult ev = evaluate(U, V, test);
  REQUIRE(ev.mean_ndcg == 1.0);
  REQUIRE(std::fabs(ev.rmse - std::sqrt((9.0 + 16.0) / 2.0)) < 1e-12);
}

TEST_CASE("evaluation rejects an empty test store", "[metrics]") {
  RatingStore test;
  test.m = 1;
  test.n = 1;
  test.by_user = {{}};
  REQUIRE_THROWS_AS(evaluate(Mat{{1.0}}, Mat{{1.0}}, test), std::domain_error);
}
