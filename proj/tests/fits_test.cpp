#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bsv/errors.hpp"
#include "bsv/lm.hpp"
#include "bsv/peak_fit.hpp"
#include "bsv/random.hpp"

using namespace bsv;

namespace {

constexpr double kFourLn2 = 2.772588722239781;

std::vector<double> gaussian_profile(const std::vector<double>& x, double b,
                                     double a, double c, double f) {
  std::vector<double> y;
  y.reserve(x.size());
  for (double xi : x) {
    y.push_back(b + a * std::exp(-kFourLn2 * (xi - c) * (xi - c) / (f * f)));
  }
  return y;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> x;
  for (int i = 0; i < n; ++i) x.push_back(lo + (hi - lo) * i / (n - 1.0));
  return x;
}

}  // namespace

TEST_CASE("exact Gaussian data is recovered to 1e-8") {
  const auto x = linspace(-10.0, 10.0, 25);
  const auto y = gaussian_profile(x, 1.8, 0.8, 0.3, 4.1);
  const GaussianPeak fit = fit_gaussian(x, y);
  CHECK(std::abs(fit.baseline - 1.8) < 1e-8);
  CHECK(std::abs(fit.amplitude - 0.8) < 1e-8);
  CHECK(std::abs(fit.center - 0.3) < 1e-8);
  CHECK(std::abs(fit.fwhm - 4.1) < 1e-8);
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("paper-like noisy scan data recovers the width within 0.3") {
  const auto x = linspace(-10.0, 10.0, 41);
  auto y = gaussian_profile(x, 1.8, 0.8, 0.0, 4.1);
  RngStream rng(77, 0);
  std::vector<double> sigma(y.size(), 0.02 * 2.6);
  for (auto& v : y) v += sigma[0] * rng.normal();
  const GaussianPeak fit = fit_gaussian(x, y, sigma);
  CHECK(std::abs(fit.fwhm - 4.1) < 0.3);
  CHECK(fit.fwhm_err > 0.0);
  CHECK(fit.fwhm_err < 0.5);
  // The reported uncertainty should be in the right ballpark for 2% noise.
  CHECK(fit.baseline_err > 1e-3);
}

TEST_CASE("flat data yields zero amplitude and a degenerate center") {
  const auto x = linspace(0.0, 8.0, 17);
  std::vector<double> y(x.size(), 1.8);
  const GaussianPeak fit = fit_gaussian(x, y);
  CHECK(std::abs(fit.amplitude) < 1e-6);
  CHECK(fit.degenerate);
  CHECK(std::isinf(fit.center_err));
}

TEST_CASE("fit input validation") {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<double> y{1, 2, 3, 4};
  CHECK_THROWS_AS(fit_gaussian(x, y), std::invalid_argument);
  std::vector<double> x5{1, 2, 3, 4, 5}, y5{1, 2, 1, 2, 1};
  std::vector<double> bad_sigma{1, 1, 1, -1, 1};
  CHECK_THROWS_AS(fit_gaussian(x5, y5, bad_sigma), std::invalid_argument);
}

TEST_CASE("weighted fit follows the trusted points") {
  // Give the wings tiny uncertainties and the peak region huge ones; the
  // fitted baseline must then match the wings closely.
  const auto x = linspace(-12.0, 12.0, 25);
  auto y = gaussian_profile(x, 2.0, 1.0, 0.0, 4.0);
  std::vector<double> sigma;
  for (double xi : x) sigma.push_back(std::abs(xi) > 8.0 ? 1e-4 : 0.5);
  const GaussianPeak fit = fit_gaussian(x, y, sigma);
  CHECK(std::abs(fit.baseline - 2.0) < 1e-3);
}

TEST_CASE("LM reports non-convergence with the last iterate") {
  const LmModel impossible = [](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                Eigen::MatrixXd& j) {
    r.resize(2);
    r << std::numeric_limits<double>::quiet_NaN(), 0.0;
    j.resize(2, 1);
    j << 1.0, 1.0;
    (void)p;
  };
  Eigen::VectorXd x0(1);
  x0 << 2.5;
  try {
    lm_minimize(impossible, x0);
    FAIL("expected FitError");
  } catch (const FitError& err) {
    REQUIRE(err.last_params.size() == 1);
    CHECK(err.last_params[0] == 2.5);
  }
}
