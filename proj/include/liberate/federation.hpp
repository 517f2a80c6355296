// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Training orchestration. Each round: clients compute item and profile
// gradients against the same V snapshot, update their own profile rows,
// perturb uploads, the server sums per-item contributions in ascending
// user order, applies the regularizer once, steps V, and commits a block.
// The centralized baseline runs the identical arithmetic on one node with
// privacy and the ledger switched off, which keeps the two paths bitwise
// comparable.

#ifndef LIBERATE_FEDERATION_HPP
#define LIBERATE_FEDERATION_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liberate/dataset.hpp"
#include "liberate/errors.hpp"
#include "liberate/ldp.hpp"
#include "liberate/ledger.hpp"
#include "liberate/metrics.hpp"
#include "liberate/mf_core.hpp"
#include "liberate/rng.hpp"
#include "liberate/sharing.hpp"

namespace liberate {

enum class RunMode { federated, centralized };

inline RunMode parse_run_mode(const std::string& s) {
  if (s == "federated") return RunMode::federated;
  if (s == "centralized") return RunMode::centralized;
  throw std::invalid_argument("mode must be federated or centralized");
}

struct RunConfig {
  Hyperparams hp;
  PrivacyParams privacy;
  SharePlan share_plan;
  int difficulty = 2;
  RunMode mode = RunMode::federated;
  RegMode reg_mode = RegMode::server;
  std::uint64_t master_seed = 0;
  bool early_stop = false;      // stop after 5 rounds of < 1e-6 improvement
  bool wall_clock = false;      // logical timestamps unless opted in

  void validate() const {
    if (!(hp.gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    if (!(hp.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    if (hp.latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
    if (hp.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
    if (difficulty < 0 || difficulty > 8)
      throw std::invalid_argument("difficulty outside [0,8]");
    privacy.validate();
    share_plan.validate();
  }
};

struct RoundReport {
  int round = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  double objective = 0.0;
  double wall_ms_compute = 0.0;
  double wall_ms_ledger = 0.0;
  std::int64_t ledger_block_index = -1;
};

/// Logical timestamps (1, 2, 3, ...) keep re-runs bit-identical; wall-clock
/// values are opt-in for live provenance.
class Clock {
 public:
  explicit Clock(bool wall) : wall_(wall) {}

  std::int64_t now_ms() {
    if (wall_)
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    return ++logical_;
  }

 private:
  bool wall_;
  std::int64_t logical_ = 0;
};

struct FederationState {
  RatingStore train;  // client shards, after any sharing
  RatingStore test;
  Mat U;
  Mat V;
  std::vector<Rng> dp_rngs;  // one persistent noise stream per client
  Chain chain;
  bool with_ledger = true;
  Clock clock{false};
};

/// Digest-only view of U: hash the concatenation of per-row digests in
/// user-id order, so no raw profile row has to leave its client.
inline std::string user_rows_digest(const Mat& U) {
  Bytes concatenated;
  for (const auto& row : U) {
    Bytes rb = canonical_matrix_bytes(Mat{row});
    Digest d = Sha256::hash(rb.data(), rb.size());
    concatenated.insert(concatenated.end(), d.begin(), d.end());
  }
  return sha256_hex(concatenated);
}

inline FederationState init_training_state(const RatingStore& train,
                                           const RatingStore& test,
                                           const RunConfig& cfg, bool with_ledger) {
  cfg.validate();
  FederationState st;
  st.train = train;
  st.test = test;
  Rng rng_u(derive_seed(cfg.master_seed, "init:U"));
  Rng rng_v(derive_seed(cfg.master_seed, "init:V"));
  st.U = init_factors(train.m, cfg.hp.latent_dim, rng_u);
  st.V = init_factors(train.n, cfg.hp.latent_dim, rng_v);
  st.dp_rngs.reserve(train.m);
  for (int i = 0; i < train.m; ++i)
    st.dp_rngs.emplace_back(
        derive_seed(cfg.privacy.seed, "dp:" + std::to_string(i)));
  st.with_ledger = with_ledger;
  st.clock = Clock(cfg.wall_clock);
  if (with_ledger) st.chain = make_genesis(cfg.difficulty, st.clock.now_ms());
  return st;
}

namespace detail {

inline double train_rmse_of(const RatingStore& train, const Mat& U, const Mat& V) {
  double sq = 0.0;
  std::size_t count = 0;
  for (int u = 0; u < train.m; ++u)
    for (const auto& [item, value] : train.by_user[u]) {
      double d = value - predict(U[u], V[item]);
      sq += d * d;
      ++count;
    }
  return count == 0 ? 0.0 : std::sqrt(sq / static_cast<double>(count));
}

inline double ms_between(std::chrono::steady_clock::time_point a,
                         std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace detail

/// One synchronized round. Both gradients are taken against the incoming
/// (V, u_i) snapshot; u_i steps first only because no one else reads it.
inline RoundReport run_round(FederationState& st, const RunConfig& cfg, int round) {
  auto t0 = std::chrono::steady_clock::now();
  RoundReport report;
  report.round = round;
  try {
    std::map<int, Vec> aggregate;  // item id -> summed upload
    for (int i = 0; i < st.train.m; ++i) {
      const auto& shard = st.train.by_user[i];
      if (shard.empty()) continue;  // nothing to learn from or upload
      ClientGradient g = grad_items(shard, st.U[i], st.V, cfg.hp.lambda, cfg.reg_mode);
      Vec gu = grad_user(shard, st.U[i], st.V, cfg.hp.lambda);
      st.U[i] = sgd_step(st.U[i], gu, cfg.hp.gamma);
      if (cfg.mode == RunMode::federated)
        g = perturb_gradient(g, cfg.privacy, st.dp_rngs[i]);
      for (const auto& [item, vec] : g.entries) {
        auto [it, fresh] = aggregate.try_emplace(item, vec.size(), 0.0);
        for (std::size_t k = 0; k < vec.size(); ++k) it->second[k] += vec[k];
      }
    }

    Mat aggregate_dense(st.train.n, Vec(cfg.hp.latent_dim, 0.0));
    for (const auto& [item, vec] : aggregate) aggregate_dense[item] = vec;

    for (int j = 0; j < st.train.n; ++j) {
      Vec g = aggregate_dense[j];
      if (cfg.reg_mode == RegMode::server)
        for (int k = 0; k < cfg.hp.latent_dim; ++k)
          g[k] += 2.0 * cfg.hp.lambda * st.V[j][k];
      st.V[j] = sgd_step(st.V[j], g, cfg.hp.gamma);
    }

    report.train_rmse = detail::train_rmse_of(st.train, st.U, st.V);
    report.test_rmse = st.test.total_ratings() == 0
                           ? std::nan("")
                           : evaluate(st.U, st.V, st.test).rmse;
    report.objective = objective(st.train, st.U, st.V, cfg.hp.lambda);

    auto t1 = std::chrono::steady_clock::now();
    report.wall_ms_compute = detail::ms_between(t0, t1);

    if (st.with_ledger) {
      ModelUpdateRecord rec;
      rec.round = round;
      rec.user_matrix_digest = user_rows_digest(st.U);
      rec.item_matrix_digest = sha256_hex(canonical_matrix_bytes(st.V));
      rec.aggregate_gradient_digest =
          sha256_hex(canonical_matrix_bytes(aggregate_dense));
      const Block& b = append(st.chain, RecordType::model_update,
                              encode_update(rec), st.clock.now_ms());
      report.ledger_block_index = static_cast<std::int64_t>(b.index);
      report.wall_ms_ledger = detail::ms_between(t1, std::chrono::steady_clock::now());
    }
  } catch (const NumericError& e) {
    throw NumericError("round " + std::to_string(round) + ": " + e.what());
  }
  return report;
}

struct TrainingResult {
  Mat U;
  Mat V;
  std::vector<RoundReport> reports;
  Chain chain;
  std::vector<ShareRecord> shares;
};

namespace detail {

inline std::vector<RoundReport> run_rounds(FederationState& st, const RunConfig& cfg) {
  std::vector<RoundReport> reports;
  double prev_objective = std::nan("");
  int stalled = 0;
  for (int round = 1; round <= cfg.hp.iterations; ++round) {
    RoundReport r = run_round(st, cfg, round);
    reports.push_back(r);
    if (cfg.early_stop) {
      if (std::isfinite(prev_objective) &&
          prev_objective - r.objective < 1e-6)
        ++stalled;
      else
        stalled = 0;
      prev_objective = r.objective;
      if (stalled >= 5) break;
    }
  }
  return reports;
}

}  // namespace detail

/// Sharing (one DATA_SHARE block per record, committed before round 1),
/// then the full round loop. Returns final factors, per-round reports, the
/// verified chain, and the share records that were committed.
inline TrainingResult run_training(const RatingStore& train, const RatingStore& test,
                                   const RunConfig& cfg) {
  cfg.validate();
  FederationState st = init_training_state(train, test, cfg, /*with_ledger=*/true);

  std::vector<ShareRecord> committed;
  if (cfg.mode == RunMode::federated && cfg.share_plan.fraction > 0.0) {
    RatingPool pool = build_pool(st.train);
    std::vector<ShareRecord> records;
    for (int receiver = 0; receiver < st.train.m; ++receiver) {
      if (st.train.by_user[receiver].empty()) continue;  // nothing to expand
      Rng rng(derive_seed(cfg.share_plan.seed,
                          "share:" + std::to_string(receiver)));
      for (auto& rec : sample_shares(receiver, st.train, pool, cfg.share_plan, rng))
        records.push_back(std::move(rec));
    }
    for (auto& rec : records) {
      rec.timestamp_ms = st.clock.now_ms();
      append(st.chain, RecordType::data_share, encode_share(rec), rec.timestamp_ms);
    }
    st.train = apply_shares(st.train, records);
    committed = std::move(records);
  }

  std::vector<RoundReport> reports = detail::run_rounds(st, cfg);

  VerifyResult v = verify(st.chain);
  if (!v.ok)
    throw IntegrityError("post-run ledger check failed: block " +
                         std::to_string(v.index) + ": " + v.reason);
  return TrainingResult{std::move(st.U), std::move(st.V), std::move(reports),
                        std::move(st.chain), std::move(committed)};
}

/// Identical math with all data on one node: no sharing, no noise, no
/// ledger. With privacy off and server-side regularization the federated
/// path reproduces this bitwise.
inline TrainingResult run_centralized(const RatingStore& train,
                                      const RatingStore& test, const RunConfig& cfg) {
  RunConfig local = cfg;
  local.mode = RunMode::centralized;
  local.privacy.enabled = false;
  local.share_plan.fraction = 0.0;
  local.validate();
  FederationState st = init_training_state(train, test, local, /*with_ledger=*/false);
  std::vector<RoundReport> reports = detail::run_rounds(st, local);
  return TrainingResult{std::move(st.U), std::move(st.V), std::move(reports),
                        Chain{}, {}};
}

/// Per-round metrics, one line per round. Value columns are deterministic
/// for a fixed config and seed; the two wall-clock columns are not.
inline void write_metrics_csv(const std::vector<RoundReport>& reports,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path, 0);
  out << "round,train_rmse,test_rmse,objective,wall_ms_compute,wall_ms_ledger\n";
  char buf[512];
  for (const RoundReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.3f,%.3f\n", r.round,
                  r.train_rmse, r.test_rmse, r.objective, r.wall_ms_compute,
                  r.wall_ms_ledger);
    out << buf;
  }
  if (!out) throw ParseError("short write to " + path, 0);
}

}  // namespace liberate

#endif  // LIBERATE_FEDERATION_HPP
