#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adiabatic {

/// Root of every error thrown by the library. The CLI maps the two families
/// below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: arguments out of range, malformed files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation that could not be carried out to the requested accuracy.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The requested (kind, order) combination has no closed form; differentiate
/// numerically instead.
class CapabilityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegeneracyError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// θ cannot be extracted when a boundary quantity vanishes.
class UndefinedPhaseError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Non-fatal diagnostics collected by operations that degrade gracefully
/// (precision warnings, skipped rows, dropped points).
struct Warnings {
  std::vector<std::string> messages;

  void add(std::string message) { messages.push_back(std::move(message)); }
  bool empty() const { return messages.empty(); }
};

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->add(std::move(message));
}

}  // namespace adiabatic
