#include "bsv/lm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

#include "bsv/errors.hpp"

namespace bsv {

LmResult lm_minimize(const LmModel& model, Eigen::VectorXd params,
                     const LmOptions& opts) {
  const auto dim = params.size();
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  model(params, residuals, jacobian);
  double cost = 0.5 * residuals.squaredNorm();

  double lambda = opts.initial_lambda;
  LmResult result;
  result.params = params;
  result.jtj = jacobian.transpose() * jacobian;
  result.cost = cost;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    result.iterations = iter;
    const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
    const Eigen::VectorXd gradient = jacobian.transpose() * residuals;

    if (gradient.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
      result.converged = true;
      break;
    }

    // Marquardt scaling keeps the damping meaningful across badly scaled
    // parameters; a tiny absolute floor handles zero diagonal entries.
    Eigen::MatrixXd damped = jtj;
    for (Eigen::Index k = 0; k < dim; ++k) {
      damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
    }

    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
    bool accepted = false;
    if (step.allFinite()) {
      const Eigen::VectorXd trial = params + step;
      Eigen::VectorXd trial_res;
      Eigen::MatrixXd trial_jac;
      model(trial, trial_res, trial_jac);
      const double trial_cost = 0.5 * trial_res.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double decrease =
            (cost - trial_cost) / std::max(cost, 1e-300);
        params = trial;
        residuals = trial_res;
        jacobian = trial_jac;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-14);
        accepted = true;
        result.params = params;
        result.jtj = jacobian.transpose() * jacobian;
        result.cost = cost;
        if (decrease < opts.cost_tol) {
          result.converged = true;
          break;
        }
      }
    }
    if (!accepted) {
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
  }

  if (!result.converged) {
    std::vector<double> last(result.params.data(),
                             result.params.data() + result.params.size());
    throw FitError("fit did not converge within the iteration cap", last,
                   result.iterations);
  }
  result.jtj = jacobian.transpose() * jacobian;
  result.params = params;
  result.cost = cost;
  return result;
}

}  // namespace bsv
