#pragma once

#include <stdexcept>
#include <string>

namespace mmsim {

/// Caller broke a documented precondition (stepping a finished episode,
/// unknown agent, out-of-box action, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration. `key()` names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value surfaced inside the simulation or the trainer.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A persisted episode log that cannot be read back faithfully.
class CorruptLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaVersionError : public CorruptLogError {
 public:
  SchemaVersionError(int found, int supported)
      : CorruptLogError("unsupported schema version " + std::to_string(found) +
                        " (supported: " + std::to_string(supported) + ")"),
        found_(found) {}

  int found() const noexcept { return found_; }

 private:
  int found_;
};

}  // namespace mmsim
