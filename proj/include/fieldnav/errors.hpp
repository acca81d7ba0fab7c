#pragma once

#include <stdexcept>
#include <string>

namespace fieldnav {

// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied data: malformed files, out-of-range parameters,
// inconsistent inputs. Maps to CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad controller/solver configuration (weights, horizon, tolerances).
// Maps to CLI exit code 4.
class SolverConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidRadius : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidStep : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OutOfDomain : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DiscontinuousTour : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewTargets : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfeasibleInstance : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySegment : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PackingInfeasible : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace fieldnav
