#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

/// Argument outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A result would overflow double precision in the requested representation.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// A quantity that only exists for p < 1 (or p*e^{aT} < 1) was requested
/// outside that region.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A truncated series hit its term cap before the residual bound fell
/// below tolerance. Carries what was accumulated so far.
class SeriesError : public std::runtime_error {
 public:
  SeriesError(const std::string& what, double partial, double bound)
      : std::runtime_error(what), partial_(partial), bound_(bound) {}

  double partial() const noexcept { return partial_; }
  double bound() const noexcept { return bound_; }

 private:
  double partial_;
  double bound_;
};

/// Objective is divergent (infinite) everywhere on the searched bracket.
class NoMinimumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration. `field` names the offending entry using
/// dotted JSON path notation (e.g. "protocol.max_tx").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)), message_(message) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace aoi
