#include "bsv/modes.hpp"

#include <cmath>

namespace bsv {

ModeComposition compose_fractional_m(double target_m, double total_mean,
                                     DistKind kind) {
  if (!(target_m >= 1.0) || !std::isfinite(target_m)) {
    throw std::invalid_argument("target mode count must be >= 1");
  }
  if (!(total_mean > 0.0) || !std::isfinite(total_mean)) {
    throw std::invalid_argument("total mean must be positive");
  }

  ModeComposition comp;
  comp.kind = kind;

  const double rounded = std::round(target_m);
  if (std::abs(target_m - rounded) < 1e-12) {
    const auto k = static_cast<std::size_t>(rounded);
    comp.per_mode_means.assign(k, total_mean / static_cast<double>(k));
    return comp;
  }

  std::vector<double> weights;
  if (target_m < 2.0) {
    // Two modes (1, x): (1+x)^2/(1+x^2) = m  =>  (m-1)x^2 - 2x + (m-1) = 0.
    const double d = target_m - 1.0;
    const double x = (1.0 - std::sqrt(1.0 - d * d)) / d;
    weights = {1.0, x};
  } else {
    // ceil(m) unit modes plus one remainder mode x > 1 (larger root):
    // (m-1)x^2 - 2Jx + J(m-J) = 0 with J = ceil(m).
    const double j = std::ceil(target_m);
    const double d = target_m - 1.0;
    const double disc = j * j - d * (target_m - j) * j;
    const double x = (j + std::sqrt(disc)) / d;
    weights.assign(static_cast<std::size_t>(j), 1.0);
    weights.push_back(x);
  }

  double wsum = 0;
  for (double w : weights) wsum += w;
  comp.per_mode_means.reserve(weights.size());
  for (double w : weights) comp.per_mode_means.push_back(total_mean * w / wsum);
  return comp;
}

}  // namespace bsv
