#pragma once

#include <stdexcept>
#include <string>

namespace confmask {

/// Base class of all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid user-supplied configuration: out-of-range parameters, a shrink
/// family that does not match the data, and the like.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or inconsistent input data: bad files, malformed manifests,
/// dimension mismatches between paired inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant violation. Indicates a bug, not a user error.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace confmask
