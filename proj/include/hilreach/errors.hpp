#pragma once

#include <stdexcept>
#include <string>

namespace hilreach {

// Bad configuration or arguments supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, dimensions, records).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical precondition failed (non-positive-definite matrix, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public NumericError {
 public:
  NotPositiveDefinite(std::size_t component, const std::string& what)
      : NumericError("component " + std::to_string(component) + ": " + what),
        component_(component) {}

  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

}  // namespace hilreach
