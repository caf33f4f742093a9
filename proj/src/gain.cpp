#include "bsv/gain.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bsv/lm.hpp"

namespace bsv {

namespace {

// Gamma below which sinh^2(Gamma u) is a pure quadratic to better than ~3%
// over the whole power range, so A and Gamma are only jointly identifiable.
constexpr double kLowGainThreshold = 0.3;

}  // namespace

GainFitResult fit_gain(std::span<const double> powers,
                       std::span<const double> signals) {
  const std::size_t n = powers.size();
  if (n < 5 || signals.size() != n) {
    throw std::invalid_argument("gain fit needs at least 5 (power, signal) points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(powers[i] > 0.0) || (i > 0 && powers[i] <= powers[i - 1])) {
      throw std::invalid_argument("pump powers must be positive and increasing");
    }
    if (!(signals[i] > 0.0)) {
      throw std::invalid_argument("PDC signals must be positive");
    }
  }

  const double p_max = powers[n - 1];
  Eigen::VectorXd u(n), log_s(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = std::sqrt(powers[i] / p_max);
    log_s[i] = std::log(signals[i]);
  }

  // Initial guess: for high gain log S is linear in u with slope 2*Gamma.
  const double span_u = u[n - 1] - u[0];
  double gamma0 = (log_s[n - 1] - log_s[0]) / (2.0 * std::max(span_u, 1e-12));
  gamma0 = std::clamp(gamma0, 0.05, 400.0);
  const double log_a0 =
      log_s[n - 1] - std::log(std::pow(std::sinh(gamma0), 2.0));

  // params = (log A, Gamma); residuals in log domain.
  const auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                         Eigen::MatrixXd& jac) {
    const double log_a = p[0];
    const double gamma = p[1];
    r.resize(static_cast<Eigen::Index>(n));
    jac.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = gamma * u[i];
      // log sinh^2(x), with the x -> 0 limit handled via log(x^2).
      const double ls = x > 1e-8 ? 2.0 * std::log(std::sinh(x))
                                 : 2.0 * std::log(std::max(x, 1e-300));
      r[static_cast<Eigen::Index>(i)] = log_a + ls - log_s[static_cast<Eigen::Index>(i)];
      jac(static_cast<Eigen::Index>(i), 0) = 1.0;
      // d/dGamma log sinh^2(Gamma u) = 2 u coth(Gamma u).
      const double coth = x > 1e-8 ? std::cosh(x) / std::sinh(x) : 1.0 / x;
      jac(static_cast<Eigen::Index>(i), 1) = 2.0 * u[i] * coth;
    }
  };

  Eigen::VectorXd initial(2);
  initial << log_a0, std::abs(gamma0);
  const LmResult lm = lm_minimize(model, initial);

  GainFitResult result;
  result.scale = std::exp(lm.params[0]);
  result.gamma_max = std::abs(lm.params[1]);
  result.residual_norm = std::sqrt(2.0 * lm.cost);
  result.iterations = lm.iterations;

  // Degeneracy: either the recovered gain never leaves the quadratic regime
  // or the curvature matrix makes (log A, Gamma) effectively one parameter.
  bool correlated = false;
  const double det = lm.jtj.determinant();
  const double scale2 = lm.jtj(0, 0) * lm.jtj(1, 1);
  if (scale2 > 0.0 && det / scale2 < 1e-6) correlated = true;
  result.degenerate = result.gamma_max < kLowGainThreshold || correlated;
  return result;
}

}  // namespace bsv
