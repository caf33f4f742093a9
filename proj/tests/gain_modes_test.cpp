#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bsv/distributions.hpp"
#include "bsv/errors.hpp"
#include "bsv/estimator.hpp"
#include "bsv/gain.hpp"
#include "bsv/modes.hpp"
#include "support/stats.hpp"

using namespace bsv;

TEST_CASE("gain law sinh^2") {
  CHECK(mean_photons_from_gain(0.0) == 0.0);
  CHECK(mean_photons_from_gain(1.0) ==
        doctest::Approx(1.3810978455418157).epsilon(1e-12));
  // Gamma = 15.8 corresponds to ~1.3e13 photons per mode.
  CHECK(std::abs(mean_photons_from_gain(15.8) - 1.3e13) / 1.3e13 < 0.05);
  // No overflow misbehavior up to Gamma ~ 300.
  CHECK(std::isfinite(mean_photons_from_gain(300.0)));
  CHECK_THROWS_AS(mean_photons_from_gain(-0.1), std::invalid_argument);
}

namespace {

std::pair<std::vector<double>, std::vector<double>> synth_gain_curve(
    double gamma_max, double scale, int points, double noise,
    std::uint64_t seed) {
  std::vector<double> powers, signals;
  RngStream rng(seed, 99);
  for (int i = 0; i < points; ++i) {
    const double p = 5.0 + 70.0 * i / (points - 1.0);
    const double u = std::sqrt(p / 75.0);
    double s = scale * std::pow(std::sinh(gamma_max * u), 2.0);
    if (noise > 0) s *= 1.0 + noise * rng.normal();
    powers.push_back(p);
    signals.push_back(s);
  }
  return {powers, signals};
}

}  // namespace

TEST_CASE("gain fit interpolates exact model data") {
  const auto [powers, signals] = synth_gain_curve(15.8, 1.0, 15, 0.0, 1);
  const GainFitResult fit = fit_gain(powers, signals);
  CHECK(fit.gamma_max == doctest::Approx(15.8).epsilon(1e-9));
  CHECK(fit.scale == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.residual_norm < 1e-8);
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("gain fit round-trips noisy data within 0.3") {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const auto [powers, signals] = synth_gain_curve(15.8, 2.5, 15, 0.01, seed);
    const GainFitResult fit = fit_gain(powers, signals);
    CAPTURE(seed);
    CHECK(std::abs(fit.gamma_max - 15.8) < 0.3);
    CHECK_FALSE(fit.degenerate);
  }
}

TEST_CASE("gain fit flags degenerate low-gain data") {
  // Linear data: S proportional to P is the Gamma->0 limit, where only
  // A*Gamma^2 is identifiable.
  std::vector<double> powers, signals;
  for (int i = 1; i <= 10; ++i) {
    powers.push_back(static_cast<double>(i));
    signals.push_back(3.0 * static_cast<double>(i));
  }
  const GainFitResult fit = fit_gain(powers, signals);
  CHECK(fit.degenerate);
  CHECK(fit.gamma_max < 1.0);
}

TEST_CASE("gain fit input validation") {
  std::vector<double> p{1, 2, 3, 4, 5}, s{1, 2, 3, 4, -5};
  CHECK_THROWS_AS(fit_gain(std::span<const double>(p).first(4),
                           std::span<const double>(s).first(4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_gain(p, s), std::invalid_argument);  // negative signal
  std::vector<double> bad{1, 2, 2, 4, 5};
  CHECK_THROWS_AS(fit_gain(bad, p), std::invalid_argument);  // not increasing
}

TEST_CASE("effective mode count floors each ratio at one") {
  ModeGeometry g;  // paper-like defaults: 0.45/4.1 mrad, 0.1/0.22 nm
  CHECK(effective_mode_count(g) == 1.0);

  g.detected_angle = g.mode_angle_fwhm;
  g.detected_bandwidth = g.mode_bandwidth;
  CHECK(effective_mode_count(g) == 1.0);

  g.detected_bandwidth = 10.0 * g.mode_bandwidth;
  CHECK(effective_mode_count(g) == doctest::Approx(10.0).epsilon(1e-12));

  ModeGeometry bad;
  bad.mode_bandwidth = -1.0;
  CHECK_THROWS_AS(effective_mode_count(bad), std::invalid_argument);
}

TEST_CASE("volumes are c tau rho^2") {
  ModeGeometry g;
  CHECK(coherence_volume(g) ==
        doctest::Approx(g.phase_velocity * g.coherence_time *
                        g.coherence_radius_sq));
  CHECK(detection_volume(g) ==
        doctest::Approx(g.phase_velocity * g.detection_time *
                        g.detection_radius_sq));
}

TEST_CASE("multimode reduction law") {
  CHECK(reduce_g2(3.0, 1.25) == doctest::Approx(2.6).epsilon(1e-12));
  CHECK(reduce_g2(2.0, 1.25) == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(reduce_g2(3.0, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
  for (double g : {1.0, 1.8, 2.0, 3.5, 4.0}) {
    CHECK(reduce_g2(g, 1.0) == g);  // fixed point at m = 1
  }
  CHECK_THROWS_AS(reduce_g2(2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(reduce_g2(0.5, 2.0), std::invalid_argument);
}

TEST_CASE("fractional mode composition") {
  SUBCASE("target 1 gives a single mode") {
    const auto comp = compose_fractional_m(1.0, 42.0);
    CHECK(comp.per_mode_means == std::vector<double>{42.0});
  }
  SUBCASE("target 1.25 gives ratio 4 - sqrt(15)") {
    const auto comp = compose_fractional_m(1.25, 100.0);
    REQUIRE(comp.per_mode_means.size() == 2);
    const double ratio = comp.per_mode_means[1] / comp.per_mode_means[0];
    CHECK(ratio == doctest::Approx(4.0 - std::sqrt(15.0)).epsilon(1e-10));
  }
  SUBCASE("target 2 gives two equal modes") {
    const auto comp = compose_fractional_m(2.0, 10.0);
    REQUIRE(comp.per_mode_means.size() == 2);
    CHECK(comp.per_mode_means[0] == doctest::Approx(5.0));
    CHECK(comp.per_mode_means[1] == doctest::Approx(5.0));
  }
  SUBCASE("targets above 2 extend to ceil(m)+1 modes") {
    const auto comp = compose_fractional_m(2.5, 10.0);
    CHECK(comp.per_mode_means.size() == 4);
  }
  SUBCASE("effective m is reproduced to 1e-10") {
    for (double target : {1.05, 1.25, 1.5, 1.9, 2.5, 3.7, 7.3, 4.0}) {
      const auto comp = compose_fractional_m(target, 123.0);
      CAPTURE(target);
      CHECK(std::abs(effective_m(comp) - target) < 1e-10);
      double total = 0;
      for (double v : comp.per_mode_means) total += v;
      CHECK(total == doctest::Approx(123.0).epsilon(1e-12));
    }
  }
  SUBCASE("invalid targets") {
    CHECK_THROWS_AS(compose_fractional_m(0.9, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(compose_fractional_m(1.5, 0.0), std::invalid_argument);
  }
}

TEST_CASE("summing k equal thermal modes shows the washed-out g2") {
  for (int k : {1, 2, 5, 10}) {
    RngStream rng(500 + static_cast<std::uint64_t>(k), 0);
    Eigen::ArrayXd totals = Eigen::ArrayXd::Zero(300'000);
    for (int j = 0; j < k; ++j) {
      totals += sample(thermal(100.0 / k), rng, totals.size());
    }
    const G2Estimate est = estimate_g2_photons(totals);
    CAPTURE(k);
    CHECK(test::within_se(est.g2, 1.0 + 1.0 / k, est.std_error, 0.0, 3.0));
  }
}

TEST_CASE("superbunched light through the fractional composition") {
  const auto comp =
      compose_fractional_m(1.25, 100.0, DistKind::kSqueezedVacuum);
  RngStream rng(600, 0);
  Eigen::ArrayXd totals = Eigen::ArrayXd::Zero(1'000'000);
  for (double mean : comp.per_mode_means) {
    totals += sample(squeezed_vacuum(mean), rng, totals.size());
  }
  const G2Estimate est = estimate_g2_photons(totals);
  const double expected = reduce_g2(3.0 + 1.0 / 100.0, 1.25);
  CHECK(test::within_se(est.g2, expected, est.std_error, 0.0, 3.0));
}
