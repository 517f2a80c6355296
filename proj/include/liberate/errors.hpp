// Copyright (c) 2026 The LIBERATE Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LIBERATE_ERRORS_HPP
#define LIBERATE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liberate {

/// Malformed input file or config text. Carries the 1-based line number
/// when one is known (0 otherwise).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg
                                : msg),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Two records claim the same slot (e.g. duplicate share for one
/// (receiver, item) pair).
class ConflictError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A chain failed verification, or an operation refused to touch one.
class IntegrityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter or state became non-finite during training.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A value cannot be canonically encoded (e.g. non-finite matrix entry).
class EncodingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad experiment configuration (unknown key, invalid value).
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nonce space exhausted while mining. Practically unreachable.
class MiningError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace liberate

#endif  // LIBERATE_ERRORS_HPP
