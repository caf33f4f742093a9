#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "bsv/random.hpp"

namespace bsv {

/// FWHM of a Gaussian to its standard deviation: fwhm / (2*sqrt(2*ln 2)).
inline double fwhm_to_sigma(double fwhm) { return fwhm / 2.3548200450309493; }
inline double sigma_to_fwhm(double sigma) { return sigma * 2.3548200450309493; }

struct Loss {
  double transmission = 1.0;  // eta in (0, 1]
};

struct Beamsplitter {
  double transmittance = 0.5;  // T in (0, 1)
};

/// Analog p-i-n detector: linear photon-to-charge conversion plus additive
/// zero-mean Gaussian electronic noise. Defaults are the 70 nV*s <-> 8e3
/// photons calibration and the 10 nV*s noise FWHM.
struct Detector {
  double volts_per_photon = 70.0 / 8000.0;  // nV*s per photon
  double noise_fwhm = 10.0;                 // nV*s
};

/// Integrated signals of one pulse in the two channels, nV*s. Electronic
/// noise admits negative excursions.
struct PulseRecord {
  double s1 = 0;
  double s2 = 0;
};

/// Binomial thinning helper. Values that are exact counts (integral and
/// small enough for an exact draw) are thinned binomially; continuum values
/// get the matched-moment Gaussian: p*n + N(0, p(1-p)n).
inline double thin(double n, double p, RngStream& rng) {
  constexpr double kMaxExactN = 1.0e6;
  if (n <= 0.0) return 0.0;
  if (n <= kMaxExactN && n == std::floor(n)) {
    return static_cast<double>(rng.binomial(static_cast<std::int64_t>(n), p));
  }
  return p * n + std::sqrt(p * (1.0 - p) * n) * rng.normal();
}

/// Optical loss as binomial thinning with survival probability eta.
inline double apply_loss(double n, double eta, RngStream& rng) {
  if (!(eta > 0.0) || eta > 1.0) {
    throw std::invalid_argument("transmission must be in (0, 1]");
  }
  if (eta == 1.0) return n;
  return thin(n, eta, rng);
}

/// Nonpolarizing beamsplitter: binomial partition of the photon number.
/// Only intensity correlations are measured downstream, so no phase is
/// tracked; n1 + n2 == n holds exactly in both regimes.
struct SplitResult {
  double n1 = 0;
  double n2 = 0;
};

inline SplitResult split(double n, double transmittance, RngStream& rng) {
  if (!(transmittance > 0.0) || !(transmittance < 1.0)) {
    throw std::invalid_argument("transmittance must be in (0, 1)");
  }
  const double n1 = thin(n, transmittance, rng);
  return {n1, n - n1};
}

/// Detector response in nV*s.
inline double detect(double n, const Detector& det, RngStream& rng) {
  double s = det.volts_per_photon * n;
  if (det.noise_fwhm > 0.0) {
    s += fwhm_to_sigma(det.noise_fwhm) * rng.normal();
  }
  return s;
}

}  // namespace bsv
