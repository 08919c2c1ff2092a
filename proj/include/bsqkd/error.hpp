#pragma once

#include <stdexcept>
#include <string>

namespace bsqkd {

// Argument outside the mathematical domain of an operation (t ∉ [0,1], negative
// distance, undefined conditional probability, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid input data for a constructor (negative or non-finite probabilities,
// all-zero weights).
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stated precondition of a key-rate formula is violated (e.g. gamma1 <= Gamma).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or incomplete scenario configuration. Carries the offending key and
// line (line 0 when the key is missing altogether).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace bsqkd
