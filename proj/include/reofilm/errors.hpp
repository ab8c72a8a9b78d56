#pragma once

#include <stdexcept>
#include <string>

namespace reofilm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where a formula is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A state at which the model cannot be evaluated (thin film, non-invertible rheology).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Explicit stepping would need a step below the configured minimum.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; carries the offending dotted key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace reofilm
