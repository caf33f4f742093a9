#pragma once

#include <Eigen/Core>
#include <functional>

namespace bsv {

/// Evaluate residuals r(p) and the Jacobian dr/dp at parameters p.
using LmModel = std::function<void(const Eigen::VectorXd& params,
                                   Eigen::VectorXd& residuals,
                                   Eigen::MatrixXd& jacobian)>;

struct LmOptions {
  int max_iterations = 200;
  double cost_tol = 1e-14;      // relative cost decrease below this converges
  double gradient_tol = 1e-12;  // infinity norm of J^T r
  // Damping schedule: start at initial_lambda, divide by 10 after an
  // accepted step (floor 1e-14), multiply by 10 after a rejected one
  // (non-convergence once lambda exceeds 1e14 with no accepted step).
  double initial_lambda = 1e-3;
};

struct LmResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd jtj;  // J^T J at the solution (curvature matrix)
  double cost = 0;      // 0.5 * ||r||^2
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling.
/// Throws FitError (carrying the last iterate) if the iteration cap is hit
/// without convergence.
LmResult lm_minimize(const LmModel& model, Eigen::VectorXd initial,
                     const LmOptions& options = {});

}  // namespace bsv
