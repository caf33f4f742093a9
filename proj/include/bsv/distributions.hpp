#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "bsv/random.hpp"

namespace bsv {

/// Per-mode photon-number laws of parametric down-conversion light.
///
///   Thermal        P(n) = <n>^n / (<n>+1)^(n+1)            (geometric)
///   SqueezedVacuum P(n) = n!/(2^n ((n/2)!)^2) *
///                         <n>^(n/2) / (<n>+1)^(n/2+1/2)    for even n,
///                  P(n) = 0 for odd n
///   Poisson        P(n) = e^-<n> <n>^n / n!
///   TwinBeamJoint  perfectly number-correlated pair of channels, each
///                  channel marginally thermal
enum class DistKind { kThermal, kSqueezedVacuum, kPoisson, kTwinBeamJoint };

struct PhotonDistribution {
  DistKind kind = DistKind::kThermal;
  double mean_photons = 1.0;  // photons per mode, must be positive and finite
};

/// Validating factories. Throw std::invalid_argument on mean <= 0 or non-finite.
PhotonDistribution thermal(double mean_photons);
PhotonDistribution squeezed_vacuum(double mean_photons);
PhotonDistribution poisson(double mean_photons);
PhotonDistribution twin_beam(double mean_photons);

/// Means at or below this are sampled exactly by inverse CDF; above it the
/// continuum laws take over (thermal -> mean*Exp(1), squeezed -> mean*Z^2,
/// Poisson -> matched-moment normal).
inline constexpr double kExactSamplingMaxMean = 1.0e4;

/// pmf() refuses means above this; at such brightness only the continuum
/// representation is meaningful.
inline constexpr double kPmfMeanCap = 1.0e6;

/// Residual tail mass left outside the adaptive truncation of a PMF table.
inline constexpr double kTailMass = 1.0e-12;

/// log P(n). -inf where the law assigns zero (odd n of squeezed vacuum).
/// TwinBeamJoint evaluates the per-channel (thermal) marginal.
/// Throws NumericalError for mean_photons > kPmfMeanCap and
/// std::invalid_argument for n < 0.
double log_pmf(const PhotonDistribution& dist, std::int64_t n);

/// P(n), exponentiated last from the log-domain form.
double pmf(const PhotonDistribution& dist, std::int64_t n);

struct Moments {
  double mean = 0;
  double variance = 0;
  double g2 = 0;  // normally ordered <n(n-1)>/<n>^2
};

/// Closed-form moments: thermal (m^2+m, 2), squeezed vacuum (2m(m+1), 3+1/m),
/// Poisson (m, 1). TwinBeamJoint reports the per-channel thermal marginal.
Moments moments(const PhotonDistribution& dist);

/// Cross-channel correlation of the twin-beam state, <n1 n2>/(<n1><n2>).
inline double twin_cross_g2(double mean_photons) {
  return 2.0 + 1.0 / mean_photons;
}

/// Inverse-CDF sampler over the adaptively truncated PMF (exact regime).
/// The table is built once and is immutable afterwards, so a single instance
/// may be shared by concurrent workers, each with its own stream.
class ExactSampler {
 public:
  explicit ExactSampler(const PhotonDistribution& dist);

  double operator()(RngStream& rng) const;

  /// Largest n in the table; the tail beyond carries < kTailMass probability.
  std::int64_t max_n() const { return max_n_; }
  const PhotonDistribution& distribution() const { return dist_; }

 private:
  PhotonDistribution dist_;
  std::int64_t stride_ = 1;  // 2 for squeezed vacuum (even support)
  std::int64_t max_n_ = 0;
  std::vector<double> cdf_;
};

/// One continuum-regime draw.
double sample_continuum(const PhotonDistribution& dist, RngStream& rng);

/// Draw `pulses` photon numbers. Exact inverse-CDF sampling for
/// mean <= kExactSamplingMaxMean (values are then integers stored as
/// doubles), continuum laws above. For TwinBeamJoint the returned value is
/// the shared draw emitted to both channels.
Eigen::ArrayXd sample(const PhotonDistribution& dist, RngStream& rng,
                      std::int64_t pulses);

}  // namespace bsv
