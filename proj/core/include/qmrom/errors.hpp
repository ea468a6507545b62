#pragma once

#include <stdexcept>
#include <string>

namespace qmrom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Element-level failure during assembly (degenerate Jacobian, non-finite state).
class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, long element)
      : Error(what), element_(element) {}
  long element() const noexcept { return element_; }

 private:
  long element_;
};

class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, long pivot)
      : Error(what), pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Right-hand side of a singular system is not in the range of the operator.
class ConsistencyError : public Error {
 public:
  ConsistencyError(const std::string& what, double magnitude)
      : Error(what), magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

class DegenerateModeError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

}  // namespace qmrom
