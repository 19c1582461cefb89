#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace jdi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. offset() is the byte position of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Domain errors while evaluating a coefficient (log of a non-positive value, etc).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A channel definition that violates the model invariants. Carries every violation found.
class ModelError : public Error {
 public:
  explicit ModelError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Stability, conservation or leak limits broken during a computation.
class NumericalContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace jdi
