// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "liberate/config.hpp"

using namespace liberate;

namespace {

std::string write_temp_config(const std::string& name, const std::string& body) {
  std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream(path, std::ios::binary) << body;
  return path;
}

}  // namespace

TEST_CASE("every configuration key lands in its slot", "[config]") {
  ExperimentConfig cfg;
  apply_setting(cfg, "seed", "99");
  apply_setting(cfg, "out.dir", "\"runs/x\"");
  apply_setting(cfg, "data.path", "ratings.dat");
  apply_setting(cfg, "data.format", "csv");
  apply_setting(cfg, "data.users", "12");
  apply_setting(cfg, "data.items", "50");
  apply_setting(cfg, "data.train_fraction", "0.7");
  apply_setting(cfg, "synth.users", "80");
  apply_setting(cfg, "synth.items", "200");
  apply_setting(cfg, "train.gamma", "0.01");
  apply_setting(cfg, "train.lambda", "0.001");
  apply_setting(cfg, "train.latent_dim", "16");
  apply_setting(cfg, "train.iterations", "5");
  apply_setting(cfg, "train.mode", "centralized");
  apply_setting(cfg, "train.reg_mode", "client");
  apply_setting(cfg, "train.early_stop", "true");
  apply_setting(cfg, "privacy.enabled", "true");
  apply_setting(cfg, "privacy.epsilon", "3.5");
  apply_setting(cfg, "privacy.clip_bound", "0.25");
  apply_setting(cfg, "share.fraction", "0.2");
  apply_setting(cfg, "ledger.difficulty", "3");
  apply_setting(cfg, "ledger.wall_clock", "true");

  REQUIRE(cfg.seed == 99);
  REQUIRE(cfg.out_dir == "runs/x");
  REQUIRE(cfg.data_path == "ratings.dat");
  REQUIRE(cfg.data_format == "csv");
  REQUIRE(cfg.subset_users == 12);
  REQUIRE(cfg.subset_items == 50);
  REQUIRE(cfg.train_fraction == 0.7);
  REQUIRE(cfg.synth_users == 80);
  REQUIRE(cfg.synth_items == 200);
  REQUIRE(cfg.run.hp.gamma == 0.01);
  REQUIRE(cfg.run.hp.lambda == 0.001);
  REQUIRE(cfg.run.hp.latent_dim == 16);
  REQUIRE(cfg.run.hp.iterations == 5);
  REQUIRE(cfg.run.mode == RunMode::centralized);
  REQUIRE(cfg.run.reg_mode == RegMode::client);
  REQUIRE(cfg.run.early_stop);
  REQUIRE(cfg.run.privacy.enabled);
  REQUIRE(cfg.run.privacy.epsilon == 3.5);
  REQUIRE(cfg.run.privacy.clip_bound == 0.25);
  REQUIRE(cfg.run.share_plan.fraction == 0.2);
  REQUIRE(cfg.run.difficulty == 3);
  REQUIRE(cfg.run.wall_clock);
}

TEST_CASE("unknown keys are rejected", "[config]") {
  ExperimentConfig cfg;
  REQUIRE_THROWS_AS(apply_setting(cfg, "typo.key", "1"), ConfigError);
  // the master seed fans out; per-module seeds are not assignable
  REQUIRE_THROWS_AS(apply_setting(cfg, "privacy.seed", "1"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "", "1"), ConfigError);
}

TEST_CASE("values are checked strictly", "[config]") {
  ExperimentConfig cfg;
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.early_stop", "1"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.early_stop", "TRUE"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.gamma", "abc"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.latent_dim", "2.5"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.latent_dim", "99999999999"),
                    ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "seed", "-3"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "seed", ""), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.mode", "hybrid"), ConfigError);
  REQUIRE_THROWS_AS(apply_setting(cfg, "train.reg_mode", "both"), ConfigError);
}

TEST_CASE("overrides use key=value and tolerate padding", "[config]") {
  ExperimentConfig cfg;
  apply_override(cfg, " train.gamma = 0.5 ");
  REQUIRE(cfg.run.hp.gamma == 0.5);
  apply_override(cfg, "data.path=\"a b.dat\"");
  REQUIRE(cfg.data_path == "a b.dat");
  REQUIRE_THROWS_AS(apply_override(cfg, "train.gamma"), ConfigError);
}

TEST_CASE("config files skip comments and point at bad lines", "[config]") {
  std::string good = write_temp_config("lib_cfg_good.cfg",
                                       "# experiment\n"
                                       "\n"
                                       "seed = 7\n"
                                       "  train.gamma = 0.005\n"
                                       "data.path = \"ml.dat\"\n");
  ExperimentConfig cfg = load_config(good);
  REQUIRE(cfg.seed == 7);
  REQUIRE(cfg.run.hp.gamma == 0.005);
  REQUIRE(cfg.data_path == "ml.dat");

  std::string no_eq = write_temp_config("lib_cfg_noeq.cfg",
                                        "seed = 7\n"
                                        "train.gamma 0.005\n");
  try {
    load_config(no_eq);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::string bad_key = write_temp_config("lib_cfg_badkey.cfg",
                                          "seed = 7\n"
                                          "train.gamma = 0.005\n"
                                          "nope = 1\n");
  try {
    load_config(bad_key);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("line 3") != std::string::npos);
    REQUIRE(msg.find("nope") != std::string::npos);
  }

  REQUIRE_THROWS_AS(load_config("/nonexistent/liberate.cfg"), ConfigError);
}

TEST_CASE("the master seed fans out on finalize", "[config]") {
  ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.finalize();
  REQUIRE(cfg.run.master_seed == 42);
  REQUIRE(cfg.run.privacy.seed == 42);
  REQUIRE(cfg.run.share_plan.seed == 42);
}

TEST_CASE("experiment validation covers every field family", "[config]") {
  ExperimentConfig good;
  REQUIRE_NOTHROW(good.validate());

  ExperimentConfig c = good;
  c.data_format = "tsv";
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  c = good;
  c.subset_users = 0;
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  c = good;
  c.train_fraction = 0.0;
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  c = good;
  c.train_fraction = 1.5;
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  c = good;
  c.synth_users = 1;
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  // run-level violations surface as configuration errors too
  c = good;
  c.run.hp.gamma = 0.0;
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
}
