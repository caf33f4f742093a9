#include "bsv/peak_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsv/errors.hpp"
#include "bsv/lm.hpp"

namespace bsv {

namespace {

constexpr double kFourLn2 = 2.772588722239781;  // 4 ln 2

}  // namespace

GaussianPeak fit_gaussian(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (n < 5 || y.size() != n) {
    throw std::invalid_argument("gaussian fit needs at least 5 points");
  }
  const bool weighted = !sigma.empty();
  if (weighted && sigma.size() != n) {
    throw std::invalid_argument("sigma must match the number of points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (weighted && !(sigma[i] > 0.0)) {
      throw std::invalid_argument("sigmas must be positive");
    }
  }

  // Initial guess from the data: peak location, half-max span for the width.
  const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
  const double b0 = *min_it;
  double a0 = *max_it - *min_it;
  const double c0 = x[static_cast<std::size_t>(max_it - y.begin())];
  const double x_span =
      *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
  double f0 = 0;
  {
    const double half = b0 + 0.5 * a0;
    double lo = c0, hi = c0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] >= half) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
      }
    }
    f0 = hi - lo;
  }
  if (!(f0 > 0)) f0 = x_span / 4.0;
  if (!(f0 > 0)) f0 = 1.0;
  if (a0 <= 0) a0 = std::max(1e-3 * (std::abs(b0) + 1.0), 1e-12);

  const auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                         Eigen::MatrixXd& jac) {
    const double b = p[0], a = p[1], c = p[2], f = p[3];
    const double f2 = f * f;
    r.resize(static_cast<Eigen::Index>(n));
    jac.resize(static_cast<Eigen::Index>(n), 4);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double dx = x[i] - c;
      const double e = std::exp(-kFourLn2 * dx * dx / f2);
      const double w = weighted ? 1.0 / sigma[i] : 1.0;
      r[k] = (b + a * e - y[i]) * w;
      jac(k, 0) = w;
      jac(k, 1) = e * w;
      jac(k, 2) = a * e * 2.0 * kFourLn2 * dx / f2 * w;
      jac(k, 3) = a * e * 2.0 * kFourLn2 * dx * dx / (f2 * f) * w;
    }
  };

  Eigen::VectorXd initial(4);
  initial << b0, a0, c0, f0;
  const LmResult lm = lm_minimize(model, initial);

  GaussianPeak peak;
  peak.baseline = lm.params[0];
  peak.amplitude = lm.params[1];
  peak.center = lm.params[2];
  peak.fwhm = std::abs(lm.params[3]);
  peak.chi2 = 2.0 * lm.cost;
  peak.iterations = lm.iterations;

  // Covariance from the curvature matrix. Unweighted fits are scaled by the
  // reduced chi-square so the errors reflect the scatter of the data.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lm.jtj, Eigen::ComputeFullU |
                                                    Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || !sv.allFinite()) {
    throw DegenerateFitError("curvature matrix is singular");
  }
  peak.degenerate = sv[3] / sv[0] < 1e-12;

  Eigen::VectorXd inv_sv(4);
  for (int i = 0; i < 4; ++i) {
    inv_sv[i] = sv[i] / sv[0] < 1e-12 ? 0.0 : 1.0 / sv[i];
  }
  Eigen::MatrixXd cov =
      svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  if (!weighted) {
    const double dof = static_cast<double>(n) - 4.0;
    cov *= dof > 0 ? peak.chi2 / dof : 1.0;
  }
  peak.baseline_err = std::sqrt(std::max(cov(0, 0), 0.0));
  peak.amplitude_err = std::sqrt(std::max(cov(1, 1), 0.0));
  peak.center_err = std::sqrt(std::max(cov(2, 2), 0.0));
  peak.fwhm_err = std::sqrt(std::max(cov(3, 3), 0.0));
  if (peak.degenerate) {
    peak.center_err = std::numeric_limits<double>::infinity();
  }
  return peak;
}

}  // namespace bsv
