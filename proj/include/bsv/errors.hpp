#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bsv {

/// Numerical failures (fit non-convergence, undefined estimator, degenerate
/// curvature). Argument/precondition violations use std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fit did not converge within the iteration cap; carries the last iterate.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, std::vector<double> last_params,
           int iterations)
      : NumericalError(what),
        last_params(std::move(last_params)),
        iterations(iterations) {}

  std::vector<double> last_params;
  int iterations;
};

class EstimatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace bsv
