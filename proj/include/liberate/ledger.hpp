// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

// Append-only proof-of-work ledger. Every data share and model update is a
// mined block; verification recomputes digests, linkage, and difficulty.
// Difficulty counts leading zero hex characters, so expected mining work
// grows 16x per level. The genesis payload carries the difficulty, which
// keeps the on-disk format self-describing.

#ifndef LIBERATE_LEDGER_HPP
#define LIBERATE_LEDGER_HPP

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liberate/errors.hpp"
#include "liberate/mf_core.hpp"
#include "liberate/sha256.hpp"
#include "liberate/sharing.hpp"

namespace liberate {

enum class RecordType { genesis, data_share, model_update };

inline const char* type_tag(RecordType t) {
  switch (t) {
    case RecordType::genesis: return "GEN";
    case RecordType::data_share: return "SHR";
    case RecordType::model_update: return "UPD";
  }
  throw EncodingError("unknown record type");
}

inline RecordType parse_type_tag(std::string_view tag) {
  if (tag == "GEN") return RecordType::genesis;
  if (tag == "SHR") return RecordType::data_share;
  if (tag == "UPD") return RecordType::model_update;
  throw EncodingError("unknown record type tag");
}

struct Block {
  std::uint64_t index = 0;
  std::int64_t timestamp_ms = 0;
  RecordType record_type = RecordType::genesis;
  Bytes payload;
  std::string payload_digest;  // 64 lowercase hex chars
  std::string prev_hash;       // 64 lowercase hex chars
  std::uint64_t nonce = 0;
  std::string hash;  // 64 lowercase hex chars
};

struct Chain {
  std::vector<Block> blocks;
  int difficulty = 2;  // leading zero hex chars, in [0, 8]
};

struct ModelUpdateRecord {
  int round = 0;
  std::string user_matrix_digest;
  std::string item_matrix_digest;
  std::string aggregate_gradient_digest;
};

inline const std::string kZeroHash(64, '0');
constexpr char kSep = '\x1f';

// ---- hex helpers ----

inline std::string bytes_to_hex(const Bytes& b) {
  static constexpr char alphabet[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (std::uint8_t byte : b) {
    out.push_back(alphabet[byte >> 4]);
    out.push_back(alphabet[byte & 0xF]);
  }
  return out;
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

inline Bytes hex_to_bytes(std::string_view hex) {
  if (hex.size() % 2 != 0) throw EncodingError("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw EncodingError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

// ---- canonical encodings ----

inline Bytes canonical_preimage(const Block& b) {
  std::string s = std::to_string(b.index);
  s.push_back(kSep);
  s += std::to_string(b.timestamp_ms);
  s.push_back(kSep);
  s += type_tag(b.record_type);
  s.push_back(kSep);
  s += b.payload_digest;
  s.push_back(kSep);
  s += b.prev_hash;
  s.push_back(kSep);
  s += std::to_string(b.nonce);
  return Bytes(s.begin(), s.end());
}

/// Row-major big-endian binary64 entries behind a "rows x cols" header.
/// Injective on finite matrices of a fixed shape.
inline Bytes canonical_matrix_bytes(const Mat& mat) {
  std::size_t cols = mat.empty() ? 0 : mat[0].size();
  std::string header = std::to_string(mat.size()) + " x " + std::to_string(cols);
  Bytes out(header.begin(), header.end());
  out.push_back(static_cast<std::uint8_t>(kSep));
  for (const auto& row : mat) {
    if (row.size() != cols) throw EncodingError("ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw EncodingError("non-finite matrix entry");
      auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 7; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  return out;
}

// ---- record payloads ----

namespace detail {

inline std::string f64_hex(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  static constexpr char alphabet[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i)
    out[i] = alphabet[(bits >> (60 - 4 * i)) & 0xF];
  return out;
}

inline double f64_from_hex(std::string_view hex) {
  if (hex.size() != 16) throw EncodingError("bad float encoding");
  std::uint64_t bits = 0;
  for (char c : hex) {
    int nib = hex_nibble(c);
    if (nib < 0) throw EncodingError("bad float encoding");
    bits = (bits << 4) | static_cast<std::uint64_t>(nib);
  }
  return std::bit_cast<double>(bits);
}

inline std::vector<std::string_view> split_payload(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = s.find(kSep, pos);
    if (hit == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, hit - pos));
    pos = hit + 1;
  }
}

template <typename T>
T payload_int(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw EncodingError("bad integer field in payload");
  return v;
}

}  // namespace detail

inline Bytes encode_share(const ShareRecord& rec) {
  std::string s = "SHR";
  s.push_back(kSep);
  s += std::to_string(rec.source_user);
  s.push_back(kSep);
  s += std::to_string(rec.receiver_user);
  s.push_back(kSep);
  s += std::to_string(rec.round);
  s.push_back(kSep);
  s += std::to_string(rec.timestamp_ms);
  s.push_back(kSep);
  s += std::to_string(rec.items.size());
  for (const auto& [item, value] : rec.items) {
    s.push_back(kSep);
    s += std::to_string(item);
    s.push_back(kSep);
    s += detail::f64_hex(value);
  }
  return Bytes(s.begin(), s.end());
}

inline ShareRecord decode_share(const Bytes& payload) {
  std::string_view s(reinterpret_cast<const char*>(payload.data()), payload.size());
  auto f = detail::split_payload(s);
  if (f.size() < 6 || f[0] != "SHR") throw EncodingError("not a share payload");
  ShareRecord rec;
  rec.source_user = detail::payload_int<int>(f[1]);
  rec.receiver_user = detail::payload_int<int>(f[2]);
  rec.round = detail::payload_int<int>(f[3]);
  rec.timestamp_ms = detail::payload_int<std::int64_t>(f[4]);
  auto count = detail::payload_int<std::size_t>(f[5]);
  if (f.size() != 6 + 2 * count) throw EncodingError("share item count mismatch");
  for (std::size_t i = 0; i < count; ++i)
    rec.items.emplace_back(detail::payload_int<int>(f[6 + 2 * i]),
                           detail::f64_from_hex(f[7 + 2 * i]));
  return rec;
}

inline Bytes encode_update(const ModelUpdateRecord& rec) {
  std::string s = "UPD";
  s.push_back(kSep);
  s += std::to_string(rec.round);
  s.push_back(kSep);
  s += rec.user_matrix_digest;
  s.push_back(kSep);
  s += rec.item_matrix_digest;
  s.push_back(kSep);
  s += rec.aggregate_gradient_digest;
  return Bytes(s.begin(), s.end());
}

inline ModelUpdateRecord decode_update(const Bytes& payload) {
  std::string_view s(reinterpret_cast<const char*>(payload.data()), payload.size());
  auto f = detail::split_payload(s);
  if (f.size() != 5 || f[0] != "UPD") throw EncodingError("not an update payload");
  for (int i = 2; i < 5; ++i)
    if (f[i].size() != 64) throw EncodingError("bad digest length in payload");
  ModelUpdateRecord rec;
  rec.round = detail::payload_int<int>(f[1]);
  rec.user_matrix_digest = std::string(f[2]);
  rec.item_matrix_digest = std::string(f[3]);
  rec.aggregate_gradient_digest = std::string(f[4]);
  return rec;
}

inline Bytes encode_genesis(int difficulty) {
  std::string s = "GENESIS";
  s.push_back(kSep);
  s += std::to_string(difficulty);
  return Bytes(s.begin(), s.end());
}

inline int decode_genesis_difficulty(const Bytes& payload) {
  std::string_view s(reinterpret_cast<const char*>(payload.data()), payload.size());
  auto f = detail::split_payload(s);
  if (f.size() != 2 || f[0] != "GENESIS") throw EncodingError("not a genesis payload");
  return detail::payload_int<int>(f[1]);
}

// ---- mining ----

inline bool meets_difficulty(const Digest& d, int difficulty) {
  int full = difficulty / 2;
  for (int i = 0; i < full; ++i)
    if (d[i] != 0) return false;
  if (difficulty % 2 != 0 && (d[full] & 0xF0) != 0) return false;
  return true;
}

/// Smallest nonce >= start_nonce whose block hash clears the difficulty.
/// The preimage prefix before the nonce digits is hashed once and its
/// midstate reused per attempt.
inline Block mine(Block b, int difficulty, std::uint64_t start_nonce = 0,
                  std::uint64_t* attempts_out = nullptr) {
  if (difficulty < 0 || difficulty > 8)
    throw std::invalid_argument("difficulty outside [0,8]");
  b.nonce = start_nonce;
  Bytes prefix = canonical_preimage(b);
  while (!prefix.empty() && prefix.back() != static_cast<std::uint8_t>(kSep))
    prefix.pop_back();

  Sha256 base;
  base.update(prefix.data(), prefix.size());
  std::uint64_t attempts = 0;
  for (std::uint64_t nonce = start_nonce;; ++nonce) {
    char buf[20];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), nonce);
    Sha256 h = base;
    h.update(buf, static_cast<std::size_t>(end - buf));
    Digest d = h.digest();
    ++attempts;
    if (meets_difficulty(d, difficulty)) {
      b.nonce = nonce;
      b.hash = to_hex(d);
      if (attempts_out) *attempts_out = attempts;
      return b;
    }
    if (nonce == std::numeric_limits<std::uint64_t>::max())
      throw MiningError("nonce space exhausted");
  }
}

// ---- chain operations ----

struct VerifyResult {
  bool ok = true;
  std::uint64_t index = 0;
  std::string reason;
};

inline VerifyResult fail_at(std::uint64_t index, std::string reason) {
  return VerifyResult{false, index, std::move(reason)};
}

inline VerifyResult verify(const Chain& chain) {
  if (chain.difficulty < 0 || chain.difficulty > 8)
    return fail_at(0, "difficulty out of range");
  if (chain.blocks.empty()) return fail_at(0, "empty chain");
  for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
    const Block& b = chain.blocks[i];
    if (b.index != i) return fail_at(i, "index mismatch");
    if (i == 0 && b.record_type != RecordType::genesis)
      return fail_at(i, "missing genesis");
    if (i > 0 && b.record_type == RecordType::genesis)
      return fail_at(i, "unexpected genesis");
    if (b.payload_digest != sha256_hex(b.payload))
      return fail_at(i, "payload digest mismatch");
    const std::string& want_prev = i == 0 ? kZeroHash : chain.blocks[i - 1].hash;
    if (b.prev_hash != want_prev) return fail_at(i, "prev_hash mismatch");
    if (b.hash != sha256_hex(canonical_preimage(b)))
      return fail_at(i, "hash mismatch");
    Digest d{};
    Bytes raw = hex_to_bytes(b.hash);
    std::copy(raw.begin(), raw.end(), d.begin());
    if (!meets_difficulty(d, chain.difficulty))
      return fail_at(i, "difficulty not met");
  }
  try {
    if (decode_genesis_difficulty(chain.blocks[0].payload) != chain.difficulty)
      return fail_at(0, "genesis difficulty mismatch");
  } catch (const EncodingError&) {
    return fail_at(0, "genesis payload malformed");
  }
  return VerifyResult{};
}

inline Chain make_genesis(int difficulty, std::int64_t timestamp_ms) {
  if (difficulty < 0 || difficulty > 8)
    throw std::invalid_argument("difficulty outside [0,8]");
  Chain chain;
  chain.difficulty = difficulty;
  Block b;
  b.index = 0;
  b.timestamp_ms = timestamp_ms;
  b.record_type = RecordType::genesis;
  b.payload = encode_genesis(difficulty);
  b.payload_digest = sha256_hex(b.payload);
  b.prev_hash = kZeroHash;
  chain.blocks.push_back(mine(std::move(b), difficulty));
  return chain;
}

/// Mines and appends one record. Refuses to build on a chain that no
/// longer verifies.
inline const Block& append(Chain& chain, RecordType type, Bytes payload,
                           std::int64_t timestamp_ms,
                           std::uint64_t* attempts_out = nullptr) {
  VerifyResult v = verify(chain);
  if (!v.ok)
    throw IntegrityError("append refused: block " + std::to_string(v.index) +
                         ": " + v.reason);
  Block b;
  b.index = chain.blocks.size();
  b.timestamp_ms = timestamp_ms;
  b.record_type = type;
  b.payload = std::move(payload);
  b.payload_digest = sha256_hex(b.payload);
  b.prev_hash = chain.blocks.back().hash;
  chain.blocks.push_back(mine(std::move(b), chain.difficulty, 0, attempts_out));
  return chain.blocks.back();
}

// ---- persistence ----

/// One block per line: index, timestamp, type tag, payload hex,
/// payload_digest, prev_hash, nonce, hash. Tab-separated.
inline void save_ledger(const Chain& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path, 0);
  for (const Block& b : chain.blocks) {
    out << b.index << '\t' << b.timestamp_ms << '\t' << type_tag(b.record_type)
        << '\t' << bytes_to_hex(b.payload) << '\t' << b.payload_digest << '\t'
        << b.prev_hash << '\t' << b.nonce << '\t' << b.hash << '\n';
  }
  if (!out) throw ParseError("short write to " + path, 0);
}

inline Chain load_ledger(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, 0);
  Chain chain;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view sv(line);
    std::size_t pos = 0;
    while (true) {
      std::size_t hit = sv.find('\t', pos);
      if (hit == std::string_view::npos) {
        f.push_back(sv.substr(pos));
        break;
      }
      f.push_back(sv.substr(pos, hit - pos));
      pos = hit + 1;
    }
    if (f.size() != 8) throw ParseError("expected 8 fields", line_no);
    try {
      Block b;
      b.index = detail::payload_int<std::uint64_t>(f[0]);
      b.timestamp_ms = detail::payload_int<std::int64_t>(f[1]);
      b.record_type = parse_type_tag(f[2]);
      b.payload = hex_to_bytes(f[3]);
      b.payload_digest = std::string(f[4]);
      b.prev_hash = std::string(f[5]);
      b.nonce = detail::payload_int<std::uint64_t>(f[6]);
      b.hash = std::string(f[7]);
      if (b.payload_digest.size() != 64 || b.prev_hash.size() != 64 ||
          b.hash.size() != 64)
        throw EncodingError("bad digest length");
      chain.blocks.push_back(std::move(b));
    } catch (const EncodingError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (chain.blocks.empty()) throw ParseError("empty ledger file", 0);
  if (chain.blocks[0].record_type != RecordType::genesis)
    throw ParseError("first block is not genesis", 1);
  try {
    chain.difficulty = decode_genesis_difficulty(chain.blocks[0].payload);
  } catch (const EncodingError& e) {
    throw ParseError(e.what(), 1);
  }
  return chain;
}

// ---- provenance queries ----

struct TraceReport {
  std::vector<ShareRecord> shares_out;
  std::vector<ShareRecord> shares_in;
  std::vector<int> model_update_rounds;
};

inline TraceReport trace_user(const Chain& chain, int user) {
  VerifyResult v = verify(chain);
  if (!v.ok)
    throw IntegrityError("trace refused: block " + std::to_string(v.index) + ": " +
                         v.reason);
  TraceReport report;
  for (const Block& b : chain.blocks) {
    if (b.record_type == RecordType::data_share) {
      ShareRecord rec = decode_share(b.payload);
      if (rec.source_user == user) report.shares_out.push_back(rec);
      if (rec.receiver_user == user) report.shares_in.push_back(std::move(rec));
    } else if (b.record_type == RecordType::model_update) {
      report.model_update_rounds.push_back(decode_update(b.payload).round);
    }
  }
  return report;
}

/// Flags (source, item) pairs whose shared rating sits more than
/// z_threshold population standard deviations from the item's mean shared
/// rating. Items with fewer than 3 shared ratings, or zero variance, are
/// skipped. Output sorted by item, then source.
inline std::vector<std::pair<int, int>> detect_rating_anomaly(const Chain& chain,
                                                              double z_threshold) {
  std::map<int, std::vector<std::pair<int, double>>> by_item;  // item -> (src, val)
  for (const Block& b : chain.blocks) {
    if (b.record_type != RecordType::data_share) continue;
    ShareRecord rec = decode_share(b.payload);
    for (const auto& [item, value] : rec.items)
      by_item[item].emplace_back(rec.source_user, value);
  }
  std::set<std::pair<int, int>> flagged;  // (item, source)
  for (const auto& [item, shares] : by_item) {
    if (shares.size() < 3) continue;
    double mean = 0.0;
    for (const auto& [src, value] : shares) mean += value;
    mean /= static_cast<double>(shares.size());
    double var = 0.0;
    for (const auto& [src, value] : shares) var += (value - mean) * (value - mean);
    var /= static_cast<double>(shares.size());
    if (var == 0.0) continue;
    double sd = std::sqrt(var);
    for (const auto& [src, value] : shares)
      if (std::fabs(value - mean) > z_threshold * sd) flagged.insert({item, src});
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& [item, src] : flagged) out.emplace_back(src, item);
  return out;
}

}  // namespace liberate

#endif  // LIBERATE_LEDGER_HPP
