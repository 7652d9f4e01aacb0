#pragma once

#include <stdexcept>
#include <string>

namespace ptkr {

// Base of every error raised by the library. `code()` is a stable
// machine-readable tag used by the CLI error record.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

// Probability leaked into the outer momentum band: the grid is too small for
// the requested evolution.
class GridOverflowError : public Error {
 public:
  GridOverflowError(const std::string& what, double tail_mass)
      : Error("grid_overflow", what), tail_mass_(tail_mass) {}

  double tail_mass() const noexcept { return tail_mass_; }

 private:
  double tail_mass_;
};

class ZeroStateError : public Error {
 public:
  explicit ZeroStateError(const std::string& what) : Error("zero_state", what) {}
};

class FitError : public Error {
 public:
  FitError(const std::string& code, const std::string& what) : Error(code, what) {}
};

class BracketError : public Error {
 public:
  explicit BracketError(const std::string& what) : Error("bracket_invalid", what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& code, std::string key, int line, const std::string& what)
      : Error(code, what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io_error", what) {}
};

class SchemaMismatchError : public Error {
 public:
  explicit SchemaMismatchError(const std::string& what) : Error("schema_mismatch", what) {}
};

}  // namespace ptkr
