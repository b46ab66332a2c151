#pragma once

#include <stdexcept>
#include <string>

namespace lcm {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised by factorizations; carries the block (or pivot) that failed.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(const std::string& what, int block)
      : Error(what + " (block " + std::to_string(block) + ")"), block_(block) {}
  int block() const noexcept { return block_; }

 private:
  int block_;
};

class StationarityError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double lastGradientNorm)
      : Error(what), lastGradientNorm_(lastGradientNorm) {}
  double lastGradientNorm() const noexcept { return lastGradientNorm_; }

 private:
  double lastGradientNorm_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace lcm
