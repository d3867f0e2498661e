#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace codimctl {

/// Raised when an input violates a documented precondition. The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation fails numerically (overflow, stagnation, singular systems).
/// Carries an optional JSON payload with diagnostics; the CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, nlohmann::json diagnostics = nlohmann::json::object())
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const nlohmann::json& diagnostics() const noexcept { return diagnostics_; }

 private:
  nlohmann::json diagnostics_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace codimctl
