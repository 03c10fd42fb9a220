#pragma once

#include <stdexcept>
#include <string>

namespace qosim {

/// Base for every error the library raises on its own.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An event was scheduled before the current clock.
class CausalityError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation precondition (bad parameter, wrong class...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Scenario text or values that fail validation. Carries the offending line
/// (0 when the value did not come from a file line) and dotted key path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {})
      : Error(format(message, line, key)), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& message, int line,
                            const std::string& key) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += key + ": ";
    return out + message;
  }

  int line_;
  std::string key_;
};

/// Internal-consistency failure during a run (e.g. a negative delay sample).
class RuntimeFault : public Error {
 public:
  using Error::Error;
};

}  // namespace qosim
