#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bsv/distributions.hpp"

namespace bsv {

/// Coherence and detection geometry. Defaults describe the desk-scale
/// experiment the simulator models: type-I collinear degenerate PDC at
/// 709.3 nm filtered to 0.1 nm by a monochromator and to 0.45 mrad by an
/// aperture, with 4.1 mrad / 0.22 nm single-mode sizes. Volumes are always
/// computed, never stored.
struct ModeGeometry {
  double coherence_time = 7.6e-12;        // s
  double coherence_radius_sq = 1.51e-6;   // m^2
  double detection_time = 1.8e-11;        // s
  double detection_radius_sq = 1.82e-8;   // m^2
  double phase_velocity = 1.806e8;        // m/s in the medium
  double detected_angle = 0.45e-3;        // rad
  double mode_angle_fwhm = 4.1e-3;        // rad
  double detected_bandwidth = 0.1;        // nm
  double mode_bandwidth = 0.22;           // nm
};

inline void validate(const ModeGeometry& g) {
  const double fields[] = {g.coherence_time,    g.coherence_radius_sq,
                           g.detection_time,    g.detection_radius_sq,
                           g.phase_velocity,    g.detected_angle,
                           g.mode_angle_fwhm,   g.detected_bandwidth,
                           g.mode_bandwidth};
  for (double f : fields) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw std::invalid_argument("mode geometry fields must be positive");
    }
  }
}

/// V = c * tau * rho^2.
inline double coherence_volume(const ModeGeometry& g) {
  return g.phase_velocity * g.coherence_time * g.coherence_radius_sq;
}

inline double detection_volume(const ModeGeometry& g) {
  return g.phase_velocity * g.detection_time * g.detection_radius_sq;
}

/// Effective number of detected modes from the detection/coherence volume
/// ratio, with the spectral ratio taken as bandwidth ratio and the angular
/// ratio squared, each floored at 1 (a detector smaller than the mode still
/// sees one mode). Advisory: scan scenarios take m directly as a parameter
/// rather than deriving it here.
inline double effective_mode_count(const ModeGeometry& g) {
  validate(g);
  const double spectral =
      std::max(1.0, g.detected_bandwidth / g.mode_bandwidth);
  const double ratio = g.detected_angle / g.mode_angle_fwhm;
  const double angular = std::max(1.0, ratio * ratio);
  return spectral * angular;
}

/// Multimode washout of the intensity correlation:
/// g2_meas = 1 + (g2 - 1)/m.
inline double reduce_g2(double single_mode_g2, double m) {
  if (!(m >= 1.0)) throw std::invalid_argument("mode count must be >= 1");
  if (!(single_mode_g2 >= 1.0)) {
    throw std::invalid_argument("single-mode g2 must be >= 1");
  }
  return 1.0 + (single_mode_g2 - 1.0) / m;
}

/// A set of independent Schmidt-like modes sharing one distribution kind.
struct ModeComposition {
  std::vector<double> per_mode_means;
  DistKind kind = DistKind::kThermal;
};

/// (sum N_i)^2 / (sum N_i^2).
inline double effective_m(const std::vector<double>& means) {
  if (means.empty()) throw std::invalid_argument("mode list must be non-empty");
  double s = 0, s2 = 0;
  for (double v : means) {
    s += v;
    s2 += v * v;
  }
  return s * s / s2;
}

inline double effective_m(const ModeComposition& comp) {
  return effective_m(comp.per_mode_means);
}

/// Realize a fractional effective mode number as unequal mode weights.
///
/// target_m == 1 gives one mode, integer targets give equal modes, targets
/// in (1,2) give two modes with mean ratio x solving (1+x)^2/(1+x^2) = m,
/// and larger fractional targets use ceil(m) unit modes plus one remainder
/// mode solving the same effective-m equation (ceil(m)+1 modes in total).
/// Weights are scaled so the means sum to total_mean.
ModeComposition compose_fractional_m(double target_m, double total_mean,
                                     DistKind kind = DistKind::kThermal);

}  // namespace bsv
