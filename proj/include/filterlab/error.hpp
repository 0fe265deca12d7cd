#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace filterlab {

/// Misconfigured experiment (bad level ladder, unknown identifier, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A path produced a non-finite state or left the declared coefficient bound.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Every particle of an estimate failed.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace filterlab
