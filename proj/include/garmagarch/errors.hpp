#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace garmagarch {

/// Argument outside the mathematical domain of an operation (support
/// violations, non-positive arguments, invalid invariant parameters).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative solver or recursion failed to produce a finite answer.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::optional<std::size_t> t = std::nullopt)
      : std::runtime_error(t ? what + " (t=" + std::to_string(*t) + ")" : what), t_(t) {}

  /// Observation index at which the failure happened, when known.
  [[nodiscard]] std::optional<std::size_t> index() const noexcept { return t_; }

 private:
  std::optional<std::size_t> t_;
};

/// Simulated conditional variance exploded.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model or run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data (CSV parse errors, missing cells).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace garmagarch
