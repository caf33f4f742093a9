#pragma once

#include <span>

namespace bsv {

/// Result of the weighted fit y = baseline + amplitude *
/// exp(-4 ln2 (x - center)^2 / fwhm^2). Parameter uncertainties come from
/// the inverse curvature matrix at the optimum. `degenerate` marks an
/// ill-conditioned curvature (for example flat data, where the center is
/// unidentifiable); the parameters are still returned but their
/// uncertainties are not meaningful.
struct GaussianPeak {
  double baseline = 0;
  double amplitude = 0;
  double center = 0;
  double fwhm = 0;
  double baseline_err = 0;
  double amplitude_err = 0;
  double center_err = 0;
  double fwhm_err = 0;
  bool degenerate = false;
  double chi2 = 0;
  int iterations = 0;
};

/// Weighted least squares over >= 5 points. `sigma` may be empty for an
/// unweighted fit (uncertainties are then scaled by sqrt(chi2/dof)).
/// Throws FitError on non-convergence and DegenerateFitError if the
/// curvature matrix cannot be evaluated at all.
GaussianPeak fit_gaussian(std::span<const double> x,
                          std::span<const double> y,
                          std::span<const double> sigma = {});

}  // namespace bsv
