#pragma once

#include <stdexcept>
#include <string>

namespace maxbayes {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bell-number guard tripped by exhaustive partition enumeration.
class EnumerationLimitError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel (quadrature, CDF, Cholesky) failed to deliver a usable value.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, double error_estimate = 0.0)
      : Error(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

/// Covariance or scale matrix failed the positive-definiteness check.
class NotPositiveDefiniteError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Observation violates a GEV support constraint.
class SupportError : public DomainError {
 public:
  SupportError(const std::string& what, int component) : DomainError(what), component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// Exact sampler exceeded its per-site budget of spectral functions.
class SamplerBudgetError : public Error {
 public:
  using Error::Error;
};

/// Point estimator failed (degenerate sample, optimizer non-convergence).
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, manifest or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace maxbayes
