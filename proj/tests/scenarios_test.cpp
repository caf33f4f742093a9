#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bsv/errors.hpp"
#include "bsv/modes.hpp"
#include "bsv/peak_fit.hpp"
#include "bsv/scenarios.hpp"
#include "support/stats.hpp"

using namespace bsv;

namespace {

ChainConfig noiseless_chain() {
  ChainConfig chain;
  chain.detector1.noise_fwhm = 0.0;
  chain.detector2.noise_fwhm = 0.0;
  return chain;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> x;
  for (int i = 0; i < n; ++i) x.push_back(lo + (hi - lo) * i / (n - 1.0));
  return x;
}

}  // namespace

TEST_CASE("single-mode squeezed vacuum HBT shows superbunching") {
  HbtConfig config;
  config.kind = DistKind::kSqueezedVacuum;
  config.mean_photons = 100.0;
  config.pulses = 300'000;
  config.seed = 5;
  config.chain = noiseless_chain();
  const HbtResult result = run_hbt(config);
  CHECK(test::within_se(result.estimate.g2, 3.01, result.estimate.std_error,
                        0.0, 3.0));
  CHECK_FALSE(result.noise_dominated);
}

TEST_CASE("twin-beam HBT measures the cross-channel correlation") {
  HbtConfig config;
  config.kind = DistKind::kTwinBeamJoint;
  config.mean_photons = 50.0;
  config.pulses = 200'000;
  config.seed = 6;
  config.chain = noiseless_chain();
  const HbtResult result = run_hbt(config);
  CHECK(test::within_se(result.estimate.g2, twin_cross_g2(50.0),
                        result.estimate.std_error, 0.0, 3.0));
}

TEST_CASE("fractional m washes out the thermal correlation") {
  HbtConfig config;
  config.kind = DistKind::kThermal;
  config.mean_photons = 1000.0;
  config.m = 1.25;
  config.pulses = 400'000;
  config.seed = 7;
  config.chain = noiseless_chain();
  const HbtResult result = run_hbt(config);
  CHECK(test::within_se(result.estimate.g2, 1.8, result.estimate.std_error,
                        0.0, 3.0));
}

TEST_CASE("lossy chain leaves g2 unchanged") {
  HbtConfig config;
  config.kind = DistKind::kSqueezedVacuum;
  config.mean_photons = 50.0;
  config.pulses = 300'000;
  config.seed = 8;
  config.chain = noiseless_chain();
  const HbtResult clean = run_hbt(config);
  config.chain.loss_eta = 0.4;
  const HbtResult lossy = run_hbt(config);
  CHECK(test::within_se(clean.estimate.g2, lossy.estimate.g2,
                        clean.estimate.std_error, lossy.estimate.std_error,
                        3.0));
  CHECK(lossy.mean_s1 == doctest::Approx(0.4 * clean.mean_s1).epsilon(0.02));
}

TEST_CASE("calibration with the default noisy chain") {
  CalibrationConfig config;
  config.mean_photons = 8000.0;
  config.pulses = 300'000;
  config.seed = 9;
  const HbtResult result = run_calibration(config);
  CHECK(std::abs(result.estimate.g2 - 1.0) < 0.01);
  CHECK_FALSE(result.noise_dominated);
  CHECK(result.mean_s1 == doctest::Approx(35.0).epsilon(0.01));
}

TEST_CASE("calibration deep in the noise flags the regime") {
  // Signal 0.0875 nV*s against noise sigma 4.25: the estimator is
  // noise-dominated and its bootstrap error must blow up accordingly.
  CalibrationConfig config;
  config.mean_photons = 10.0;
  config.pulses = 100'000;
  config.seed = 10;
  const HbtResult result = run_calibration(config);
  CHECK(result.noise_dominated);

  // Analytic leading-order variance of the ratio estimator: the numerator
  // fluctuation sigma^4 dominates; per-pulse relative scale sigma^2/(v^2
  // T(1-T) N^2).
  const double v = 70.0 / 8000.0;
  const double sigma = fwhm_to_sigma(10.0);
  const double numerator = v * v * 0.25 * 100.0;  // v^2 T(1-T) <n(n-1)>
  const double analytic_se =
      sigma * sigma / (numerator * std::sqrt(static_cast<double>(config.pulses)));
  CHECK(result.estimate.std_error > analytic_se / 3.0);
  CHECK(result.estimate.std_error < analytic_se * 3.0);
}

TEST_CASE("scan center point reaches the degenerate limit") {
  ScanConfig config;
  config.points = {0.0};
  config.base_m = 1.0;
  config.mean_photons = 10'000.0;
  config.pulses_per_point = 200'000;
  config.seed = 11;
  config.chain = noiseless_chain();
  const ScanResult result = run_scan(config);
  REQUIRE(result.points.size() == 1);
  CHECK_FALSE(result.fit_ok);  // a single point cannot be fit
  CHECK(test::within_se(result.points[0].g2, 3.0, result.points[0].std_error,
                        0.0, 3.0));
}

TEST_CASE("scan wing point shows plain bunching") {
  ScanConfig config;
  config.points = {50.0};  // |x - center| >> fwhm
  config.base_m = 1.0;
  config.mean_photons = 10'000.0;
  config.pulses_per_point = 200'000;
  config.seed = 12;
  config.chain = noiseless_chain();
  const ScanResult result = run_scan(config);
  CHECK(test::within_se(result.points[0].g2, 2.0, result.points[0].std_error,
                        0.0, 3.0));
}

TEST_CASE("angular scan round-trip with the paper geometry") {
  ScanConfig config;
  config.points = linspace(-10.0, 10.0, 21);
  config.center = 0.0;
  config.profile_fwhm = 4.1;
  config.base_m = 1.25;
  config.mean_photons = 8000.0;
  config.pulses_per_point = 20'000;
  config.seed = 13;
  const ScanResult result = run_scan(config);
  REQUIRE(result.fit_ok);

  // Endpoint laws: baseline 1 + 1/m, peak 1 + (2 + 1/N)/m.
  const double baseline = reduce_g2(2.0, 1.25);
  const double peak = 1.0 + (2.0 + 1.0 / 8000.0) / 1.25;
  CHECK(test::within_se(result.fit.baseline, baseline,
                        result.fit.baseline_err, 0.0, 3.0));
  const double peak_err = std::sqrt(result.fit.baseline_err *
                                        result.fit.baseline_err +
                                    result.fit.amplitude_err *
                                        result.fit.amplitude_err);
  CHECK(test::within_se(result.fit.baseline + result.fit.amplitude, peak,
                        peak_err, 0.0, 3.0));
  CHECK(std::abs(result.fit.fwhm - 4.1) < 3.0 * result.fit.fwhm_err + 0.05);
  CHECK(std::abs(result.fit.center) < 3.0 * result.fit.center_err + 0.05);
}

TEST_CASE("spectral scan shares the implementation") {
  ScanConfig config;
  config.coordinate = ScanCoordinate::kWavelengthNm;
  config.points = linspace(708.6, 710.0, 15);
  config.center = 709.3;
  config.profile_fwhm = 0.22;
  config.base_m = 1.25;
  config.mean_photons = 8000.0;
  config.pulses_per_point = 20'000;
  config.seed = 14;
  const ScanResult result = run_scan(config);
  REQUIRE(result.fit_ok);
  CHECK(std::abs(result.fit.center - 709.3) < 0.05);
  CHECK(std::abs(result.fit.fwhm - 0.22) < 3.0 * result.fit.fwhm_err + 0.01);
}

TEST_CASE("scan validates its configuration") {
  ScanConfig config;
  config.points = {};
  CHECK_THROWS_AS(run_scan(config), std::invalid_argument);
  config.points = {0.0};
  config.pulses_per_point = 999;
  CHECK_THROWS_AS(run_scan(config), std::invalid_argument);
  config.pulses_per_point = 1000;
  config.profile_fwhm = 0.0;
  CHECK_THROWS_AS(run_scan(config), std::invalid_argument);
}

TEST_CASE("fit-error coverage: generated scans land within 3 reported sigma") {
  // Calibration of the quoted fit uncertainties: over seeded repetitions the
  // true width must fall inside 3x the reported uncertainty in >= 95% of
  // runs (it would fail if the curvature-matrix errors were underestimated).
  int hits = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    ScanConfig config;
    config.points = linspace(-8.0, 8.0, 11);
    config.profile_fwhm = 4.1;
    config.base_m = 1.0;
    config.mean_photons = 2000.0;
    config.pulses_per_point = 2000;
    config.seed = 1000 + static_cast<std::uint64_t>(rep);
    config.chain = noiseless_chain();
    const ScanResult result = run_scan(config);
    if (!result.fit_ok) continue;
    if (std::abs(result.fit.fwhm - 4.1) <= 3.0 * result.fit.fwhm_err) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("thermal histogram: decreasing envelope, bunched photons") {
  HistogramConfig config;
  config.kind = DistKind::kThermal;
  config.mean_signal_nvs = 70.0;
  config.pulses = 300'000;
  config.seed = 15;
  const HistogramResult result = run_histogram(config);
  REQUIRE(result.photon_g2.has_value());
  CHECK(test::within_se(result.photon_g2->g2, 2.0,
                        result.photon_g2->std_error, 0.0, 3.0));
  CHECK(result.mean_signal == doctest::Approx(70.0).epsilon(0.02));

  // The envelope decreases monotonically beyond the noise-smeared region.
  REQUIRE_FALSE(result.theory.empty());
  for (std::size_t i = 0; i + 1 < result.theory.size(); ++i) {
    if (result.bin_lo[i] < 15.0) continue;
    CHECK(result.theory[i + 1] < result.theory[i]);
  }
}

TEST_CASE("squeezed histogram has the heavier tail at equal mean signal") {
  HistogramConfig config;
  config.mean_signal_nvs = 70.0;
  config.pulses = 300'000;
  config.range_lo = -20.0;
  config.range_hi = 600.0;
  config.seed = 16;

  config.kind = DistKind::kThermal;
  const HistogramResult th = run_histogram(config);
  config.kind = DistKind::kSqueezedVacuum;
  const HistogramResult sv = run_histogram(config);

  // Mass in the top decile of the binned range, empirically and from the
  // theoretical overlay (the PMF-level oracle for the threshold).
  const double threshold = -20.0 + 0.9 * 620.0;
  double th_emp = 0, sv_emp = 0, th_theory = 0, sv_theory = 0;
  for (std::size_t i = 0; i < th.bin_lo.size(); ++i) {
    if (th.bin_lo[i] < threshold) continue;
    th_emp += th.probability[i];
    sv_emp += sv.probability[i];
    th_theory += th.theory[i];
    sv_theory += sv.theory[i];
  }
  th_emp += static_cast<double>(th.overflow) / 300'000.0;
  sv_emp += static_cast<double>(sv.overflow) / 300'000.0;
  CHECK(sv_theory / th_theory > 1.5);
  CHECK(sv_emp / th_emp > 1.5);

  // Squeezed light also piles more mass near zero at equal mean.
  double th_zero = 0, sv_zero = 0;
  for (std::size_t i = 0; i < th.bin_lo.size(); ++i) {
    if (std::abs(th.bin_lo[i] + 1.0) < 10.0) {
      th_zero += th.probability[i];
      sv_zero += sv.probability[i];
    }
  }
  CHECK(sv_zero > th_zero);
}

TEST_CASE("zero-photon histogram reproduces the noise Gaussian") {
  HistogramConfig config;
  config.mean_signal_nvs = 0.0;
  config.pulses = 300'000;
  config.range_lo = -25.0;
  config.range_hi = 25.0;
  config.seed = 17;
  const HistogramResult result = run_histogram(config);
  CHECK_FALSE(result.photon_g2.has_value());

  std::vector<double> centers, probs;
  for (std::size_t i = 0; i < result.bin_lo.size(); ++i) {
    centers.push_back(result.bin_lo[i] + 0.5 * result.bin_width);
    probs.push_back(result.probability[i]);
  }
  const GaussianPeak fit = fit_gaussian(centers, probs);
  CHECK(std::abs(fit.fwhm - 10.0) < 0.3);
  CHECK(std::abs(fit.center) < 0.3);

  // The overlay is the noise Gaussian itself and integrates to 1.
  const double total =
      std::accumulate(result.theory.begin(), result.theory.end(), 0.0);
  CHECK(std::abs(total - 1.0) < 1e-6);
}

TEST_CASE("histogram overlays integrate to one over a wide range") {
  HistogramConfig config;
  config.mean_signal_nvs = 70.0;
  config.pulses = 2;  // the overlay is deterministic; skip the sampling cost
  config.range_lo = -25.0;
  config.range_hi = 1800.0;
  config.seed = 18;

  for (DistKind kind : {DistKind::kThermal, DistKind::kSqueezedVacuum}) {
    config.kind = kind;
    const HistogramResult result = run_histogram(config);
    const double total =
        std::accumulate(result.theory.begin(), result.theory.end(), 0.0);
    CAPTURE(static_cast<int>(kind));
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
}

TEST_CASE("histogram validates input") {
  HistogramConfig config;
  config.mean_signal_nvs = -1.0;
  CHECK_THROWS_AS(run_histogram(config), std::invalid_argument);
  config.mean_signal_nvs = 70.0;
  config.kind = DistKind::kPoisson;
  CHECK_THROWS_AS(run_histogram(config), std::invalid_argument);
  config.kind = DistKind::kThermal;
  config.bin_width_nvs = 0.0;
  CHECK_THROWS_AS(run_histogram(config), std::invalid_argument);
}

TEST_CASE("hbt is bit-identical across worker counts") {
  HbtConfig config;
  config.kind = DistKind::kThermal;
  config.mean_photons = 20.0;
  config.pulses = 150'000;  // spans multiple blocks
  config.seed = 19;
  config.threads = 1;
  const HbtResult one = run_hbt(config);
  config.threads = 4;
  const HbtResult four = run_hbt(config);
  REQUIRE(one.s1.size() == four.s1.size());
  for (Eigen::Index i = 0; i < one.s1.size(); ++i) {
    REQUIRE(one.s1[i] == four.s1[i]);
    REQUIRE(one.s2[i] == four.s2[i]);
  }
  CHECK(one.estimate.g2 == four.estimate.g2);
}
