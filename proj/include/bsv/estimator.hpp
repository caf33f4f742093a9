#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>

#include "bsv/chain.hpp"

namespace bsv {

struct G2Estimate {
  double g2 = 0;
  double std_error = 0;
};

/// Optional diagnostic correction for the signal estimator: per-channel
/// pedestal offsets and a cross-channel noise covariance are removed before
/// the ratio is formed. With the default zero-mean, channel-independent
/// electronic noise all three are zero and the corrected estimator equals
/// the plain one in expectation.
struct NoiseCorrection {
  double pedestal1 = 0;  // nV*s
  double pedestal2 = 0;  // nV*s
  double covariance = 0; // (nV*s)^2
};

/// Hanbury Brown-Twiss estimator g2 = <S1*S2> / (<S1>*<S2>), the ratio of
/// per-pulse sample means. The standard error comes from a block bootstrap
/// over 100 contiguous blocks (1000 resamples, fixed internal seed), so the
/// estimate is deterministic for a given record sequence. Throws
/// std::invalid_argument for fewer than 2 records and EstimatorError when a
/// channel mean is zero.
G2Estimate estimate_g2(const Eigen::ArrayXd& s1, const Eigen::ArrayXd& s2);
G2Estimate estimate_g2(std::span<const PulseRecord> records);
G2Estimate estimate_g2(std::span<const PulseRecord> records,
                       const NoiseCorrection& correction);

/// Single-beam normally ordered correlation <n(n-1)>/<n>^2 estimated
/// directly from photon numbers, with the same block-bootstrap error.
G2Estimate estimate_g2_photons(const Eigen::ArrayXd& n);

/// Number of bootstrap blocks (documented constant of the estimator).
inline constexpr int kBootstrapBlocks = 100;
inline constexpr int kBootstrapResamples = 1000;

}  // namespace bsv
