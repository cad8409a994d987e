#pragma once

#include <stdexcept>
#include <string>

namespace corrpool {

/// Invalid or unknown configuration value. Carries the offending field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A scenario whose parameters cannot be realized (e.g. household infection
/// probability above one, or an unreachable calibration target).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corrpool
