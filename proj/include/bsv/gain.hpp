#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace bsv {

/// Photons per mode at parametric gain Gamma: N = sinh^2(Gamma).
/// Valid up to Gamma ~ 300 before the square overflows a double.
inline double mean_photons_from_gain(double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gain must be nonnegative");
  const double s = std::sinh(gamma);
  return s * s;
}

struct GainFitResult {
  double gamma_max = 0;     // gain at the largest supplied pump power
  double scale = 0;         // overall amplitude A
  double residual_norm = 0; // Euclidean norm of the log-domain residuals
  bool degenerate = false;  // low-gain data: only A*Gamma^2 is identifiable
  int iterations = 0;
};

/// Least-squares fit of S(P) = A * sinh^2(Gamma_max * sqrt(P / P_max)) with
/// P_max fixed to the largest supplied power. The fit minimizes log-domain
/// residuals (the signals span many decades and the natural noise model is
/// multiplicative). Requires >= 5 points with positive, strictly increasing
/// powers and positive signals. Throws FitError on non-convergence.
GainFitResult fit_gain(std::span<const double> pump_powers_mw,
                       std::span<const double> pdc_signals);

}  // namespace bsv
