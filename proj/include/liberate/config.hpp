// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment configuration: a flat dotted-key file (`privacy.enabled =
// false`, `#` comments) plus repeatable command-line overrides. Unknown
// keys are rejected. One master seed fans out to every module stream, so
// a config file plus seed pins an entire run.

#ifndef LIBERATE_CONFIG_HPP
#define LIBERATE_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "liberate/errors.hpp"
#include "liberate/federation.hpp"

namespace liberate {

struct ExperimentConfig {
  // data source: a ratings file, or the synthetic generator when path empty
  std::string data_path;
  std::string data_format = "dat";
  int subset_users = 10;
  int subset_items = 40;
  double train_fraction = 0.8;
  int synth_users = 60;
  int synth_items = 160;

  std::uint64_t seed = 1;
  std::string out_dir;  // empty means: resolve via --out, then LIBERATE_OUT
  RunConfig run;

  /// Copies the master seed into every module's seed slot; modules tag
  /// their own substreams, so one knob reproduces the whole run.
  void finalize() {
    run.master_seed = seed;
    run.privacy.seed = seed;
    run.share_plan.seed = seed;
  }

  void validate() const {
    if (data_format != "dat" && data_format != "csv")
      throw ConfigError("data.format must be dat or csv");
    if (subset_users < 1 || subset_items < 1)
      throw ConfigError("subset sizes must be >= 1");
    if (!(train_fraction > 0.0) || train_fraction > 1.0)
      throw ConfigError("data.train_fraction outside (0,1]");
    if (synth_users < 2 || synth_items < 2)
      throw ConfigError("synthetic shape too small");
    try {
      run.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

inline bool config_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

inline double config_f64(std::string_view v) {
  double out = 0.0;
  if (!parse_f64(v, out))
    throw ConfigError("expected a number, got '" + std::string(v) + "'");
  return out;
}

inline int config_int(std::string_view v) {
  std::int64_t out = 0;
  if (!parse_i64(v, out) || out < INT32_MIN || out > INT32_MAX)
    throw ConfigError("expected an integer, got '" + std::string(v) + "'");
  return static_cast<int>(out);
}

inline std::uint64_t config_u64(std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

}  // namespace detail

/// Applies one `key = value` assignment. Throws ConfigError on unknown
/// keys or unparseable values.
inline void apply_setting(ExperimentConfig& cfg, std::string_view key,
                          std::string_view value) {
  using namespace detail;
  key = trim(key);
  value = trim(value);
  if (key == "seed") cfg.seed = config_u64(value);
  else if (key == "out.dir") cfg.out_dir = unquote(value);
  else if (key == "data.path") cfg.data_path = unquote(value);
  else if (key == "data.format") cfg.data_format = unquote(value);
  else if (key == "data.users") cfg.subset_users = config_int(value);
  else if (key == "data.items") cfg.subset_items = config_int(value);
  else if (key == "data.train_fraction") cfg.train_fraction = config_f64(value);
  else if (key == "synth.users") cfg.synth_users = config_int(value);
  else if (key == "synth.items") cfg.synth_items = config_int(value);
  else if (key == "train.gamma") cfg.run.hp.gamma = config_f64(value);
  else if (key == "train.lambda") cfg.run.hp.lambda = config_f64(value);
  else if (key == "train.latent_dim") cfg.run.hp.latent_dim = config_int(value);
  else if (key == "train.iterations") cfg.run.hp.iterations = config_int(value);
  else if (key == "train.mode") {
    try {
      cfg.run.mode = parse_run_mode(unquote(value));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "train.reg_mode") {
    try {
      cfg.run.reg_mode = parse_reg_mode(unquote(value));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "train.early_stop") cfg.run.early_stop = config_bool(value);
  else if (key == "privacy.enabled") cfg.run.privacy.enabled = config_bool(value);
  else if (key == "privacy.epsilon") cfg.run.privacy.epsilon = config_f64(value);
  else if (key == "privacy.clip_bound") cfg.run.privacy.clip_bound = config_f64(value);
  else if (key == "share.fraction") cfg.run.share_plan.fraction = config_f64(value);
  else if (key == "ledger.difficulty") cfg.run.difficulty = config_int(value);
  else if (key == "ledger.wall_clock") cfg.run.wall_clock = config_bool(value);
  else throw ConfigError("unknown key '" + std::string(key) + "'");
}

/// `key=value` as passed to a repeatable --set flag.
inline void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override must look like key=value: '" +
                      std::string(assignment) + "'");
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    try {
      apply_setting(cfg, sv.substr(0, eq), sv.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace liberate

#endif  // LIBERATE_CONFIG_HPP
