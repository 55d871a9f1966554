#pragma once

#include <stdexcept>
#include <string>

namespace bispec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameters violate an operation's precondition.
class InvalidParams : public Error {
 public:
  explicit InvalidParams(const std::string& msg) : Error("invalid parameters: " + msg) {}
};

/// Sample count or coefficient layout does not match the grid/field.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error("dimension mismatch: " + msg) {}
};

/// A grid does not resolve the band limit an exact quadrature needs.
class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& msg) : Error("under-resolved: " + msg) {}
};

/// Allocation would exceed the configured memory cap, or a work budget is exhausted.
class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& msg) : Error("resource limit: " + msg) {}
};

/// Time stepping left its admissible regime (non-finite values, mass drift).
class EvolutionError : public Error {
 public:
  explicit EvolutionError(const std::string& msg) : Error("evolution aborted: " + msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidParams(msg);
}

}  // namespace bispec
