#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shiftlab {

inline constexpr std::string_view kArtifactName = "shiftlab";
inline constexpr std::string_view kArtifactVersion = "0.1.0";

// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validation failure tied to a config field; `field` is a dotted path.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& message)
      : ValidationError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace shiftlab
