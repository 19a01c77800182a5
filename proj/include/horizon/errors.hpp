#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace horizon {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A point violates the chart's coordinate bounds.
struct OutOfDomainError : Error {
  using Error::Error;
};

/// A trajectory left the chart; walkers count these and abort the replica.
struct DomainExitError : Error {
  using Error::Error;
};

/// Metric (or frame Gram matrix) is numerically singular.
struct NumericalDegeneracyError : Error {
  using Error::Error;
};

struct StepTooLargeError : Error {
  using Error::Error;
};

struct SingularFrameError : Error {
  using Error::Error;
};

/// Pre-projection frame drift exceeded the health threshold; the integrator
/// step is too large for the requested tolerance.
struct OrthonormalityDriftError : Error {
  using Error::Error;
};

struct InsufficientSamplesError : Error {
  using Error::Error;
};

struct TooFewReplicasError : Error {
  using Error::Error;
};

struct UnsupportedFunctionError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Violated operation precondition (e.g. too few alpha values for a fit).
struct PreconditionError : Error {
  using Error::Error;
};

struct ParseError : Error {
  std::size_t line = 0;
  std::size_t column = 0;
  ParseError(const std::string& msg, std::size_t line_, std::size_t column_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " + std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
};

struct ValidationError : Error {
  std::string key;
  ValidationError(const std::string& key_, const std::string& msg)
      : Error("invalid config key '" + key_ + "': " + msg), key(key_) {}
};

}  // namespace horizon
