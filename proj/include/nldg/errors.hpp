#pragma once

#include <stdexcept>
#include <string>

namespace nldg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed graph topology (disconnected, bad incidence, wrong shape for a solver).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Unknown vertex or edge id.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Field/operator dimensions do not match the grid they are used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter violates its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Resolvent query at a degenerate spectral parameter (lambda = 0).
class DegenerateQueryError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Not enough samples for a requested quadrature.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Linear solve failed or missed its residual contract.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

}  // namespace nldg
