#include "bsv/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsv/errors.hpp"

namespace bsv {

namespace {

PhotonDistribution make(DistKind kind, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("mean must be positive");
  }
  return PhotonDistribution{kind, mean};
}

double log_pmf_thermal(double mean, std::int64_t n) {
  return static_cast<double>(n) * std::log(mean) -
         static_cast<double>(n + 1) * std::log1p(mean);
}

double log_pmf_squeezed(double mean, std::int64_t n) {
  if (n % 2 != 0) return -std::numeric_limits<double>::infinity();
  const double half = static_cast<double>(n) / 2.0;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         static_cast<double>(n) * std::log(2.0) -
         2.0 * std::lgamma(half + 1.0) + half * std::log(mean) -
         (half + 0.5) * std::log1p(mean);
}

double log_pmf_poisson(double mean, std::int64_t n) {
  return -mean + static_cast<double>(n) * std::log(mean) -
         std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace

PhotonDistribution thermal(double m) { return make(DistKind::kThermal, m); }
PhotonDistribution squeezed_vacuum(double m) {
  return make(DistKind::kSqueezedVacuum, m);
}
PhotonDistribution poisson(double m) { return make(DistKind::kPoisson, m); }
PhotonDistribution twin_beam(double m) {
  return make(DistKind::kTwinBeamJoint, m);
}

double log_pmf(const PhotonDistribution& dist, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("photon number must be nonnegative");
  if (dist.mean_photons > kPmfMeanCap) {
    throw NumericalError(
        "mean above PMF cap; use the continuum sampler for this regime");
  }
  switch (dist.kind) {
    case DistKind::kThermal:
    case DistKind::kTwinBeamJoint:
      return log_pmf_thermal(dist.mean_photons, n);
    case DistKind::kSqueezedVacuum:
      return log_pmf_squeezed(dist.mean_photons, n);
    case DistKind::kPoisson:
      return log_pmf_poisson(dist.mean_photons, n);
  }
  throw std::invalid_argument("unknown distribution kind");
}

double pmf(const PhotonDistribution& dist, std::int64_t n) {
  const double lp = log_pmf(dist, n);
  return std::isinf(lp) ? 0.0 : std::exp(lp);
}

Moments moments(const PhotonDistribution& dist) {
  const double m = dist.mean_photons;
  switch (dist.kind) {
    case DistKind::kThermal:
    case DistKind::kTwinBeamJoint:
      return {m, m * m + m, 2.0};
    case DistKind::kSqueezedVacuum:
      return {m, 2.0 * m * (m + 1.0), 3.0 + 1.0 / m};
    case DistKind::kPoisson:
      return {m, m, 1.0};
  }
  throw std::invalid_argument("unknown distribution kind");
}

ExactSampler::ExactSampler(const PhotonDistribution& dist) : dist_(dist) {
  if (dist.mean_photons > kExactSamplingMaxMean) {
    throw std::invalid_argument(
        "exact sampler only supports mean <= kExactSamplingMaxMean");
  }
  stride_ = dist.kind == DistKind::kSqueezedVacuum ? 2 : 1;

  // Extend the table until the residual tail mass drops below kTailMass.
  // The hard cap never binds for means within the exact regime.
  const std::size_t hard_cap = 1 << 22;
  double cum = 0.0;
  std::int64_t n = 0;
  while (true) {
    cum += pmf(dist_, n);
    cdf_.push_back(cum);
    if (1.0 - cum < kTailMass) break;
    if (cdf_.size() >= hard_cap) break;
    n += stride_;
  }
  max_n_ = n;
}

double ExactSampler::operator()(RngStream& rng) const {
  const double u = rng.u01();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const std::int64_t idx =
      it == cdf_.end() ? static_cast<std::int64_t>(cdf_.size()) - 1
                       : static_cast<std::int64_t>(it - cdf_.begin());
  return static_cast<double>(idx * stride_);
}

double sample_continuum(const PhotonDistribution& dist, RngStream& rng) {
  const double m = dist.mean_photons;
  switch (dist.kind) {
    case DistKind::kThermal:
    case DistKind::kTwinBeamJoint:
      return m * rng.exponential();
    case DistKind::kSqueezedVacuum: {
      const double z = rng.normal();
      return m * z * z;
    }
    case DistKind::kPoisson:
      return m + std::sqrt(m) * rng.normal();
  }
  throw std::invalid_argument("unknown distribution kind");
}

Eigen::ArrayXd sample(const PhotonDistribution& dist, RngStream& rng,
                      std::int64_t pulses) {
  if (pulses < 1) throw std::invalid_argument("pulses must be at least 1");
  Eigen::ArrayXd out(pulses);
  if (dist.mean_photons <= kExactSamplingMaxMean) {
    ExactSampler sampler(dist);
    for (std::int64_t i = 0; i < pulses; ++i) out[i] = sampler(rng);
  } else {
    for (std::int64_t i = 0; i < pulses; ++i) {
      out[i] = sample_continuum(dist, rng);
    }
  }
  return out;
}

}  // namespace bsv
