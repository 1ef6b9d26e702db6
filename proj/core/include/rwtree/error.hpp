#pragma once

#include <stdexcept>
#include <string>

namespace rwtree {

// Input outside the mathematical domain of an operation (non-positive
// weights, q outside (0,1], m <= 1 where supercriticality is required).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// API misuse: empty inputs, out-of-order events, mismatched lengths.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid or unsupported configuration. `key` names the offending entry
// (JSON pointer style) when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Operation requested on a configuration it does not support (e.g. exact
// offspring law for psi > 1).
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rwtree
