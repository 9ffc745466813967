#pragma once

#include <stdexcept>
#include <string>

namespace tmt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or argument invariant was violated. `field()` names the
/// offending parameter.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The large-flow threshold has no finite value: the rotor plane is faster
/// than a demand-aware circuit for every flow size, so every flow above the
/// medium threshold stays medium.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what) {}
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace tmt
