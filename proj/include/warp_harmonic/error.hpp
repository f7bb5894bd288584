#pragma once

#include <stdexcept>
#include <string>

namespace warp_harmonic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A map value left the admissible set (warp domain, unit sphere, chart guard).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic could not deliver the requested accuracy.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, long required_bits)
      : Error(what), required_bits_(required_bits) {}
  long required_bits() const { return required_bits_; }

 private:
  long required_bits_;
};

/// A verified mathematical invariant failed (theorem check).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace warp_harmonic
