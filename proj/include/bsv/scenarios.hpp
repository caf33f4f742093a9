#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsv/chain.hpp"
#include "bsv/distributions.hpp"
#include "bsv/estimator.hpp"
#include "bsv/modes.hpp"
#include "bsv/peak_fit.hpp"

namespace bsv {

/// Pulses per random-stream block. Every block draws from its own stream
/// derived from (master seed, stream id, block index), so results are
/// bit-identical for any worker count.
inline constexpr std::int64_t kBlockSize = 65536;

/// Default optical chain: no loss, 50:50 splitter, two calibrated analog
/// detectors.
struct ChainConfig {
  double loss_eta = 1.0;  // 1.0 means no loss element in the chain
  double beamsplitter_t = 0.5;
  Detector detector1{};
  Detector detector2{};
};

struct HbtConfig {
  DistKind kind = DistKind::kThermal;
  double mean_photons = 1.0;
  double m = 1.0;  // effective detected modes, realized as a composition
  std::int64_t pulses = 1'000'000;
  std::uint64_t seed = 1;
  int threads = 1;
  ChainConfig chain{};
  std::optional<NoiseCorrection> correction;  // diagnostic variant
};

struct HbtResult {
  G2Estimate estimate;
  double mean_s1 = 0;  // nV*s
  double mean_s2 = 0;
  bool noise_dominated = false;  // detector noise sigma >= expected signal
  double seconds = 0;
  Eigen::ArrayXd s1;  // per-pulse records
  Eigen::ArrayXd s2;
};

/// Hanbury Brown-Twiss run: composed source modes -> loss -> beamsplitter ->
/// two detectors -> ratio-of-means estimator. TwinBeamJoint sources skip the
/// splitter: the two conjugate channels share each pulse's photon number and
/// pass through per-channel loss instead.
HbtResult run_hbt(const HbtConfig& config);

enum class ScanCoordinate { kAngleMrad, kWavelengthNm };

struct ScanConfig {
  ScanCoordinate coordinate = ScanCoordinate::kAngleMrad;
  std::vector<double> points;
  double center = 0.0;        // 0 mrad, or 709.3 nm for spectral scans
  double profile_fwhm = 4.1;  // 4.1 mrad, or 0.22 nm
  std::int64_t pulses_per_point = 100'000;
  double base_m = 1.25;
  double mean_photons = 8000;
  std::uint64_t seed = 1;
  int threads = 1;
  ChainConfig chain{};
};

struct ScanPoint {
  double coordinate = 0;
  double g2 = 0;
  double std_error = 0;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  GaussianPeak fit{};
  bool fit_ok = false;
  std::string fit_message;
};

/// Angular or spectral g2 scan. At each coordinate the degenerate/
/// nondegenerate overlap weight w = exp(-4 ln2 (x-center)^2 / fwhm^2)
/// selects, per pulse, squeezed-vacuum source modes (probability w, ensemble
/// mean contribution w*N) or thermal ones (1-w), so the single-mode g2
/// interpolates between 3 + 1/N at the center and 2 in the wings. Points are
/// simulated on independent streams derived from (seed, point index) and the
/// profile is then fit with baseline + amplitude * Gaussian.
ScanResult run_scan(const ScanConfig& config);

struct HistogramConfig {
  DistKind kind = DistKind::kThermal;
  double mean_signal_nvs = 70.0;  // 0 means a noise-only (zero photon) run
  std::int64_t pulses = 1'000'000;
  Detector detector{};
  double bin_width_nvs = 2.0;
  double m = 1.0;
  // Default range: [-20, 25*mean + 50] nV*s, wide enough that the tail mass
  // outside is negligible for both laws.
  std::optional<double> range_lo;
  std::optional<double> range_hi;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct HistogramResult {
  std::vector<double> bin_lo;       // lower edge of each bin
  std::vector<std::int64_t> counts;
  std::vector<double> probability;  // counts / pulses
  std::vector<double> theory;       // per-bin mass of the noise-convolved
                                    // envelope; empty when m != 1
  double bin_width = 0;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  double mean_signal = 0;           // empirical, nV*s
  std::optional<G2Estimate> photon_g2;  // of the underlying photon numbers
};

/// Signal probability distribution of detected PDC light (thermal or
/// squeezed vacuum), with the theoretical envelope convolved with the
/// electronic-noise Gaussian overlaid.
HistogramResult run_histogram(const HistogramConfig& config);

struct CalibrationConfig {
  double mean_photons = 8000;
  std::int64_t pulses = 1'000'000;
  Detector detector{};
  double m = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Coherent-source calibration of the measurement chain: Poisson light
/// through the default chain; the expected value is 1.
HbtResult run_calibration(const CalibrationConfig& config);

}  // namespace bsv
