// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: training runs, parameter sweeps, ledger
// verification, provenance traces, anomaly scans, PoW benchmarking, and
// synthetic data generation. Exit codes: 0 ok, 2 configuration error,
// 3 numeric abort, 4 ledger verification failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "liberate/config.hpp"
#include "liberate/dataset.hpp"
#include "liberate/federation.hpp"
#include "liberate/ledger.hpp"
#include "liberate/metrics.hpp"
#include "liberate/synthetic.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitLedger = 4;

liberate::RatingStore load_dataset(const liberate::ExperimentConfig& cfg) {
  liberate::RatingStore full;
  if (cfg.data_path.empty()) {
    liberate::SyntheticSpec spec;
    spec.users = cfg.synth_users;
    spec.items = cfg.synth_items;
    full = liberate::generate_ratings(spec, cfg.seed);
  } else {
    auto format = cfg.data_format == "dat" ? liberate::RatingsFormat::dat
                                           : liberate::RatingsFormat::csv;
    full = liberate::load_movielens(cfg.data_path, format);
  }
  return liberate::subset_top(full, cfg.subset_users, cfg.subset_items);
}

std::string resolve_out_dir(const std::string& flag_value,
                            const liberate::ExperimentConfig& cfg) {
  if (!flag_value.empty()) return flag_value;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("LIBERATE_OUT"); env && *env) return env;
  return ".";
}

json share_to_json(const liberate::ShareRecord& rec) {
  json items = json::array();
  for (const auto& [item, value] : rec.items)
    items.push_back({{"item", item}, {"value", value}});
  return {{"source", rec.source_user},
          {"receiver", rec.receiver_user},
          {"round", rec.round},
          {"timestamp_ms", rec.timestamp_ms},
          {"items", items}};
}

void print_share_line(const char* arrow, const liberate::ShareRecord& rec) {
  std::printf("  %s user %d -> user %d (ts %lld):", arrow, rec.source_user,
              rec.receiver_user, static_cast<long long>(rec.timestamp_ms));
  for (const auto& [item, value] : rec.items)
    std::printf(" item %d=%g", item, value);
  std::printf("\n");
}

struct TrainArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_flag;
  std::optional<std::uint64_t> seed_flag;
};

liberate::ExperimentConfig build_config(const TrainArgs& args) {
  liberate::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = liberate::load_config(args.config_path);
  for (const auto& ov : args.overrides) liberate::apply_override(cfg, ov);
  if (args.seed_flag) cfg.seed = *args.seed_flag;
  cfg.finalize();
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainArgs& args) {
  liberate::ExperimentConfig cfg = build_config(args);
  std::string out_dir = resolve_out_dir(args.out_flag, cfg);
  std::filesystem::create_directories(out_dir);

  liberate::RatingStore data = load_dataset(cfg);
  auto [train, test] =
      liberate::split(data, liberate::SplitSpec{cfg.train_fraction, cfg.seed});

  liberate::TrainingResult result =
      cfg.run.mode == liberate::RunMode::federated
          ? liberate::run_training(train, test, cfg.run)
          : liberate::run_centralized(train, test, cfg.run);

  std::string csv_path = out_dir + "/metrics.csv";
  liberate::write_metrics_csv(result.reports, csv_path);

  std::string ledger_path;
  if (!result.chain.blocks.empty()) {
    ledger_path = out_dir + "/ledger.tsv";
    liberate::save_ledger(result.chain, ledger_path);
  }

  json summary;
  summary["mode"] =
      cfg.run.mode == liberate::RunMode::federated ? "federated" : "centralized";
  summary["seed"] = cfg.seed;
  summary["rounds"] = result.reports.size();
  summary["dataset"] = {{"users", train.m},
                        {"items", train.n},
                        {"train_ratings", train.total_ratings()},
                        {"test_ratings", test.total_ratings()}};
  double compute_ms = 0.0, ledger_ms = 0.0;
  for (const auto& r : result.reports) {
    compute_ms += r.wall_ms_compute;
    ledger_ms += r.wall_ms_ledger;
  }
  summary["timing_ms"] = {{"compute", compute_ms}, {"ledger", ledger_ms}};
  if (!result.reports.empty()) {
    const auto& last = result.reports.back();
    summary["final"]["train_rmse"] = last.train_rmse;
    summary["final"]["objective"] = last.objective;
    if (test.total_ratings() > 0) {
      liberate::EvalResult ev = liberate::evaluate(result.U, result.V, test);
      summary["final"]["test_rmse"] = ev.rmse;
      summary["final"]["ndcg"] = ev.mean_ndcg;
    } else {
      summary["final"]["test_rmse"] = nullptr;
      summary["final"]["ndcg"] = nullptr;
    }
  }
  if (!ledger_path.empty())
    summary["ledger"] = {{"path", ledger_path},
                         {"blocks", result.chain.blocks.size()},
                         {"difficulty", result.chain.difficulty},
                         {"share_records", result.shares.size()}};

  std::string summary_path = out_dir + "/summary.json";
  {
    std::ofstream out(summary_path);
    out << summary.dump(2) << "\n";
  }

  std::printf("wrote %s\n", csv_path.c_str());
  if (!ledger_path.empty()) std::printf("wrote %s\n", ledger_path.c_str());
  std::printf("wrote %s\n", summary_path.c_str());
  if (!result.reports.empty()) {
    const auto& last = result.reports.back();
    std::printf("final: round=%d train_rmse=%.6f test_rmse=%.6f objective=%.6f\n",
                last.round, last.train_rmse, last.test_rmse, last.objective);
    if (summary["final"].contains("ndcg") && !summary["final"]["ndcg"].is_null())
      std::printf("final: ndcg=%.6f\n", summary["final"]["ndcg"].get<double>());
  }
  return kExitOk;
}

int cmd_verify(const std::string& ledger_path) {
  liberate::Chain chain = liberate::load_ledger(ledger_path);
  liberate::VerifyResult v = liberate::verify(chain);
  if (!v.ok) {
    std::printf("FAIL block %llu: %s\n", static_cast<unsigned long long>(v.index),
                v.reason.c_str());
    return kExitLedger;
  }
  std::printf("ok: %zu blocks, difficulty %d\n", chain.blocks.size(),
              chain.difficulty);
  return kExitOk;
}

int cmd_trace(const std::string& ledger_path, int user, bool as_json,
              std::optional<double> anomaly_z) {
  liberate::Chain chain = liberate::load_ledger(ledger_path);
  liberate::TraceReport report = liberate::trace_user(chain, user);
  if (as_json) {
    json out;
    out["user"] = user;
    out["shares_out"] = json::array();
    for (const auto& rec : report.shares_out)
      out["shares_out"].push_back(share_to_json(rec));
    out["shares_in"] = json::array();
    for (const auto& rec : report.shares_in)
      out["shares_in"].push_back(share_to_json(rec));
    out["model_update_rounds"] = report.model_update_rounds;
    if (anomaly_z) {
      out["anomalies"] = json::array();
      for (const auto& [src, item] :
           liberate::detect_rating_anomaly(chain, *anomaly_z))
        out["anomalies"].push_back({{"source", src}, {"item", item}});
    }
    std::printf("%s\n", out.dump(2).c_str());
    return kExitOk;
  }
  std::printf("user %d: %zu shares out, %zu shares in, %zu model updates\n", user,
              report.shares_out.size(), report.shares_in.size(),
              report.model_update_rounds.size());
  std::printf("shares out:\n");
  for (const auto& rec : report.shares_out) print_share_line("->", rec);
  std::printf("shares in:\n");
  for (const auto& rec : report.shares_in) print_share_line("<-", rec);
  if (!report.model_update_rounds.empty())
    std::printf("model updates: rounds %d..%d (%zu blocks)\n",
                report.model_update_rounds.front(),
                report.model_update_rounds.back(),
                report.model_update_rounds.size());
  if (anomaly_z) {
    auto flagged = liberate::detect_rating_anomaly(chain, *anomaly_z);
    std::printf("anomalies at z>%g: %zu\n", *anomaly_z, flagged.size());
    for (const auto& [src, item] : flagged)
      std::printf("  source user %d, item %d\n", src, item);
  }
  return kExitOk;
}

int cmd_pow_bench(int difficulty, int blocks, bool as_json) {
  if (difficulty < 0 || difficulty > 8)
    throw liberate::ConfigError("difficulty outside [0,8]");
  if (blocks < 1) throw liberate::ConfigError("blocks must be >= 1");
  json rows = json::array();
  if (!as_json)
    std::printf("%-6s %-8s %-16s %-12s %-12s\n", "level", "blocks",
                "mean_attempts", "total_s", "ms_per_block");
  for (int level = 0; level <= difficulty; ++level) {
    std::uint64_t total_attempts = 0;
    std::string prev(64, '0');
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < blocks; ++i) {
      liberate::Block b;
      b.index = static_cast<std::uint64_t>(i);
      b.timestamp_ms = i;
      b.record_type = liberate::RecordType::model_update;
      std::string payload = "BENCH";
      payload.push_back('\x1f');
      payload += std::to_string(level);
      payload.push_back('\x1f');
      payload += std::to_string(i);
      b.payload = liberate::Bytes(payload.begin(), payload.end());
      b.payload_digest = liberate::sha256_hex(b.payload);
      b.prev_hash = prev;
      std::uint64_t attempts = 0;
      liberate::Block mined = liberate::mine(std::move(b), level, 0, &attempts);
      prev = mined.hash;
      total_attempts += attempts;
    }
    double total_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double mean_attempts =
        static_cast<double>(total_attempts) / static_cast<double>(blocks);
    if (as_json)
      rows.push_back({{"level", level},
                      {"blocks", blocks},
                      {"mean_attempts", mean_attempts},
                      {"total_s", total_s},
                      {"ms_per_block", 1000.0 * total_s / blocks}});
    else
      std::printf("%-6d %-8d %-16.2f %-12.4f %-12.4f\n", level, blocks,
                  mean_attempts, total_s, 1000.0 * total_s / blocks);
  }
  if (as_json) std::printf("%s\n", rows.dump(2).c_str());
  return kExitOk;
}

int cmd_gen_data(const std::string& out_path, int users, int items,
                 std::uint64_t seed) {
  liberate::SyntheticSpec spec;
  spec.users = users;
  spec.items = items;
  liberate::RatingStore store = liberate::generate_ratings(spec, seed);
  liberate::write_movielens_dat(store, out_path);
  std::printf("wrote %s (%d users, %d items, %zu ratings)\n", out_path.c_str(),
              store.m, store.n, store.total_ratings());
  return kExitOk;
}

int cmd_sweep(const TrainArgs& args, const std::string& axis,
              const std::vector<std::string>& values, int seeds,
              const std::string& out_file) {
  if (values.empty()) throw liberate::ConfigError("sweep needs at least one value");
  if (seeds < 1) throw liberate::ConfigError("seeds must be >= 1");
  std::ofstream out(out_file);
  if (!out) throw liberate::ConfigError("cannot write " + out_file);
  out << "key,value,seed,final_train_rmse,final_test_rmse,ndcg,objective\n";
  for (const auto& value : values) {
    for (int s = 0; s < seeds; ++s) {
      liberate::ExperimentConfig cfg = build_config(args);
      cfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
      if (axis == "privacy.epsilon" && value == "off")
        cfg.run.privacy.enabled = false;
      else
        liberate::apply_setting(cfg, axis, value);
      cfg.finalize();
      cfg.validate();
      liberate::RatingStore data = load_dataset(cfg);
      auto [train, test] = liberate::split(
          data, liberate::SplitSpec{cfg.train_fraction, cfg.seed});
      liberate::TrainingResult result =
          cfg.run.mode == liberate::RunMode::federated
              ? liberate::run_training(train, test, cfg.run)
              : liberate::run_centralized(train, test, cfg.run);
      double ndcg_mean = 1.0, test_rmse = 0.0;
      if (test.total_ratings() > 0) {
        liberate::EvalResult ev = liberate::evaluate(result.U, result.V, test);
        ndcg_mean = ev.mean_ndcg;
        test_rmse = ev.rmse;
      }
      const auto& last = result.reports.back();
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.6f,%.6f,%.6f,%.6f\n",
                    axis.c_str(), value.c_str(),
                    static_cast<unsigned long long>(cfg.seed), last.train_rmse,
                    test_rmse, ndcg_mean, last.objective);
      out << buf;
      std::printf("%s=%s seed=%llu test_rmse=%.4f ndcg=%.4f\n", axis.c_str(),
                  value.c_str(), static_cast<unsigned long long>(cfg.seed),
                  test_rmse, ndcg_mean);
    }
  }
  std::printf("wrote %s\n", out_file.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated matrix-factorization recommender with local "
               "differential privacy and a proof-of-work provenance ledger"};
  app.require_subcommand(1);

  TrainArgs train_args;
  std::string ledger_path;
  int user_id = 0;
  bool as_json = false;
  std::optional<double> anomaly_z;
  int difficulty = 2;
  int blocks = 20;
  std::uint64_t gen_seed = 1;
  int gen_users = 60, gen_items = 160;
  std::string gen_out = "ratings.dat";
  std::string sweep_axis = "share.fraction";
  std::vector<std::string> sweep_values;
  int sweep_seeds = 10;
  std::string sweep_out = "sweep.csv";

  CLI::App* train = app.add_subcommand("train", "Run one training experiment");
  train->add_option("--config", train_args.config_path, "Config file path");
  train->add_option("--set", train_args.overrides,
                    "Override a config key (key=value, repeatable)");
  train->add_option("--out", train_args.out_flag, "Output directory");
  std::uint64_t seed_holder = 0;
  CLI::Option* seed_opt =
      train->add_option("--seed", seed_holder, "Master seed override");

  CLI::App* verify = app.add_subcommand("verify", "Verify a ledger file");
  verify->add_option("--ledger", ledger_path, "Ledger file path")->required();

  CLI::App* trace =
      app.add_subcommand("trace", "Provenance report for one user");
  trace->add_option("--ledger", ledger_path, "Ledger file path")->required();
  trace->add_option("--user", user_id, "User id")->required();
  trace->add_flag("--json", as_json, "Emit JSON");
  double z_holder = 0.0;
  CLI::Option* z_opt = trace->add_option(
      "--anomaly-z", z_holder, "Also scan shared ratings at this z threshold");

  CLI::App* bench = app.add_subcommand("pow-bench", "Proof-of-work benchmark");
  bench->add_option("--difficulty", difficulty, "Top difficulty level (0-8)");
  bench->add_option("--blocks", blocks, "Blocks to mine per level");
  bench->add_flag("--json", as_json, "Emit JSON");

  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic ratings file");
  gen->add_option("--out", gen_out, "Output file path");
  gen->add_option("--users", gen_users, "User count");
  gen->add_option("--items", gen_items, "Item count");
  gen->add_option("--seed", gen_seed, "Generator seed");

  CLI::App* sweep =
      app.add_subcommand("sweep", "Train across an axis of values x seeds");
  sweep->add_option("--config", train_args.config_path, "Config file path");
  sweep->add_option("--set", train_args.overrides,
                    "Override a config key (key=value, repeatable)");
  sweep->add_option("--axis", sweep_axis, "Config key to sweep");
  sweep->add_option("--values", sweep_values, "Axis values (repeatable or CSV)")
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "Seeds per value");
  sweep->add_option("--out", sweep_out, "Output CSV path");
  CLI::Option* sweep_seed_opt =
      sweep->add_option("--seed", seed_holder, "Base master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*seed_opt || *sweep_seed_opt) train_args.seed_flag = seed_holder;
    if (*z_opt) anomaly_z = z_holder;
    if (train->parsed()) return cmd_train(train_args);
    if (verify->parsed()) return cmd_verify(ledger_path);
    if (trace->parsed()) return cmd_trace(ledger_path, user_id, as_json, anomaly_z);
    if (bench->parsed()) return cmd_pow_bench(difficulty, blocks, as_json);
    if (gen->parsed()) return cmd_gen_data(gen_out, gen_users, gen_items, gen_seed);
    if (sweep->parsed())
      return cmd_sweep(train_args, sweep_axis, sweep_values, sweep_seeds, sweep_out);
  } catch (const liberate::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const liberate::NumericError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return kExitNumeric;
  } catch (const liberate::IntegrityError& e) {
    std::fprintf(stderr, "ledger error: %s\n", e.what());
    return kExitLedger;
  } catch (const liberate::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
