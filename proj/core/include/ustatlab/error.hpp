#pragma once

#include <stdexcept>
#include <string>

namespace ustat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in different Hilbert spaces (or have mismatched lengths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An enumeration would exceed its evaluation cap.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold (asymmetric kernel, arity too
/// large, missing F_0 property, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed sampler / kernel / design parameters.
class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems. Carries the offending key and source line
/// (line is 1-based, 0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line,
                            const std::string& what) {
    std::string msg = "config";
    if (line > 0) msg += ":" + std::to_string(line);
    if (!key.empty()) msg += ": key '" + key + "'";
    return msg + ": " + what;
  }

  std::string key_;
  int line_ = 0;
};

}  // namespace ustat
