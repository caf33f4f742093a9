#include "bsv/scenarios.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <thread>

#include "bsv/errors.hpp"

namespace bsv {

namespace {

constexpr double kFourLn2 = 2.772588722239781;

// Stream-id salts keep different scenario families statistically
// independent under a shared master seed.
constexpr std::uint64_t kHbtSalt = 0x01ull << 32;
constexpr std::uint64_t kScanSalt = 0x02ull << 32;
constexpr std::uint64_t kHistSalt = 0x03ull << 32;

/// Exact-or-continuum per-mode sampler, cheap to copy and safe to share
/// across workers (the CDF table is immutable after construction).
class ModeSampler {
 public:
  explicit ModeSampler(const PhotonDistribution& dist)
      : dist_(dist),
        exact_(dist.mean_photons <= kExactSamplingMaxMean
                   ? std::make_shared<const ExactSampler>(dist)
                   : nullptr) {}

  double operator()(RngStream& rng) const {
    return exact_ ? (*exact_)(rng) : sample_continuum(dist_, rng);
  }

 private:
  PhotonDistribution dist_;
  std::shared_ptr<const ExactSampler> exact_;
};

std::vector<ModeSampler> make_samplers(const ModeComposition& comp) {
  std::vector<ModeSampler> samplers;
  samplers.reserve(comp.per_mode_means.size());
  for (double mean : comp.per_mode_means) {
    samplers.emplace_back(PhotonDistribution{comp.kind, mean});
  }
  return samplers;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(stream, pulse_index) for every pulse, in blocks of kBlockSize.
/// Each block gets its own stream, so the mapping pulse -> random draw does
/// not depend on the worker count.
template <typename PulseFn>
void for_each_pulse(std::int64_t pulses, std::uint64_t seed,
                    std::uint64_t stream_id, int threads, PulseFn&& fn) {
  const std::int64_t n_blocks = (pulses + kBlockSize - 1) / kBlockSize;
  const int n_threads =
      static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), n_blocks));

  auto run_block = [&](std::int64_t block) {
    RngStream stream(seed, stream_id, static_cast<std::uint64_t>(block));
    const std::int64_t lo = block * kBlockSize;
    const std::int64_t hi = std::min(lo + kBlockSize, pulses);
    for (std::int64_t i = lo; i < hi; ++i) fn(stream, i);
  };

  if (n_threads <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::int64_t b = next.fetch_add(1);
        if (b >= n_blocks) break;
        run_block(b);
      }
    });
  }
  for (auto& th : pool) th.join();
}

/// One pulse through loss, splitter and the two detectors.
/// Draw order within a pulse is fixed: source modes, loss, split, detector 1
/// noise, detector 2 noise.
struct ChainSimulator {
  const ChainConfig& chain;
  bool twin = false;

  PulseRecord operator()(double n, RngStream& rng) const {
    PulseRecord rec;
    if (twin) {
      double n1 = n, n2 = n;
      if (chain.loss_eta < 1.0) {
        n1 = apply_loss(n1, chain.loss_eta, rng);
        n2 = apply_loss(n2, chain.loss_eta, rng);
      }
      rec.s1 = detect(n1, chain.detector1, rng);
      rec.s2 = detect(n2, chain.detector2, rng);
      return rec;
    }
    if (chain.loss_eta < 1.0) n = apply_loss(n, chain.loss_eta, rng);
    const SplitResult halves = split(n, chain.beamsplitter_t, rng);
    rec.s1 = detect(halves.n1, chain.detector1, rng);
    rec.s2 = detect(halves.n2, chain.detector2, rng);
    return rec;
  }
};

bool chain_noise_dominated(const ChainConfig& chain, double mean_photons,
                           bool twin) {
  const double per_channel =
      mean_photons * chain.loss_eta * (twin ? 1.0 : chain.beamsplitter_t);
  const double s1 = chain.detector1.volts_per_photon * per_channel;
  const double s2 = chain.detector2.volts_per_photon *
                    (twin ? per_channel
                          : mean_photons * chain.loss_eta *
                                (1.0 - chain.beamsplitter_t));
  return fwhm_to_sigma(chain.detector1.noise_fwhm) >= s1 ||
         fwhm_to_sigma(chain.detector2.noise_fwhm) >= s2;
}

void validate_chain(const ChainConfig& chain) {
  if (!(chain.loss_eta > 0.0) || chain.loss_eta > 1.0) {
    throw std::invalid_argument("transmission must be in (0, 1]");
  }
  if (!(chain.beamsplitter_t > 0.0) || !(chain.beamsplitter_t < 1.0)) {
    throw std::invalid_argument("transmittance must be in (0, 1)");
  }
  if (!(chain.detector1.volts_per_photon > 0.0) ||
      !(chain.detector2.volts_per_photon > 0.0)) {
    throw std::invalid_argument("detector conversion must be positive");
  }
  if (chain.detector1.noise_fwhm < 0.0 || chain.detector2.noise_fwhm < 0.0) {
    throw std::invalid_argument("noise FWHM must be nonnegative");
  }
}

// ---------------------------------------------------------------------------
// Theoretical signal envelopes convolved with the detector noise.

double phi(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

/// Mass of the noise Gaussian inside [a, b].
double gaussian_mass(double a, double b, double sigma) {
  if (sigma <= 0.0) return (a <= 0.0 && 0.0 < b) ? 1.0 : 0.0;
  return phi(b / sigma) - phi(a / sigma);
}

/// Thermal envelope exp(-s/mean)/mean convolved with N(0, sigma), i.e. the
/// exponentially modified Gaussian, integrated over [a, b] by Simpson.
double thermal_mass(double a, double b, double mean, double sigma) {
  if (sigma <= 0.0) {
    const double lo = std::max(a, 0.0);
    const double hi = std::max(b, 0.0);
    return std::exp(-lo / mean) - std::exp(-hi / mean);
  }
  const double lambda = 1.0 / mean;
  const auto density = [&](double s) {
    const double expo = 0.5 * lambda * lambda * sigma * sigma - lambda * s;
    if (expo > 700.0) return 0.0;  // density is negligible this far out
    return 0.5 * lambda * std::exp(expo) *
           std::erfc((lambda * sigma * sigma - s) /
                     (1.4142135623730951 * sigma));
  };
  const int n = 32;  // Simpson intervals per bin
  const double h = (b - a) / n;
  double sum = density(a) + density(b);
  for (int i = 1; i < n; ++i) {
    sum += density(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

/// Squeezed-vacuum envelope: S = mean * Z^2 + noise. Mass over [a, b] as a
/// half-normal integral over z of the noise-Gaussian mass at mean * z^2.
double squeezed_mass(double a, double b, double mean, double sigma) {
  if (sigma <= 0.0) {
    const double lo = std::sqrt(std::max(a, 0.0) / mean);
    const double hi = std::sqrt(std::max(b, 0.0) / mean);
    return 2.0 * (phi(hi) - phi(lo));
  }
  const auto integrand = [&](double z) {
    const double s0 = mean * z * z;
    return 0.7978845608028654 *  // sqrt(2/pi)
           std::exp(-0.5 * z * z) *
           (phi((b - s0) / sigma) - phi((a - s0) / sigma));
  };
  const double z_max = 8.0;
  const int n = 4096;
  const double h = z_max / n;
  double sum = integrand(0.0) + integrand(z_max);
  for (int i = 1; i < n; ++i) {
    sum += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

double envelope_mass(DistKind kind, double a, double b, double mean_signal,
                     double sigma) {
  if (mean_signal <= 0.0) return gaussian_mass(a, b, sigma);
  switch (kind) {
    case DistKind::kThermal:
    case DistKind::kTwinBeamJoint:
      return thermal_mass(a, b, mean_signal, sigma);
    case DistKind::kSqueezedVacuum:
      return squeezed_mass(a, b, mean_signal, sigma);
    case DistKind::kPoisson:
      break;
  }
  throw std::invalid_argument("histogram supports thermal and squeezed kinds");
}

}  // namespace

HbtResult run_hbt(const HbtConfig& config) {
  if (config.pulses < 2) {
    throw std::invalid_argument("pulses must be at least 2");
  }
  validate_chain(config.chain);
  const PhotonDistribution source = [&] {
    switch (config.kind) {
      case DistKind::kThermal: return thermal(config.mean_photons);
      case DistKind::kSqueezedVacuum: return squeezed_vacuum(config.mean_photons);
      case DistKind::kPoisson: return poisson(config.mean_photons);
      case DistKind::kTwinBeamJoint: return twin_beam(config.mean_photons);
    }
    throw std::invalid_argument("unknown distribution kind");
  }();

  const auto t0 = std::chrono::steady_clock::now();
  const ModeComposition comp =
      compose_fractional_m(config.m, source.mean_photons, source.kind);
  const std::vector<ModeSampler> samplers = make_samplers(comp);
  const bool twin = source.kind == DistKind::kTwinBeamJoint;
  const ChainSimulator simulate{config.chain, twin};

  HbtResult result;
  result.s1.resize(config.pulses);
  result.s2.resize(config.pulses);
  for_each_pulse(config.pulses, config.seed, kHbtSalt, config.threads,
                 [&](RngStream& rng, std::int64_t i) {
                   double n = 0;
                   for (const auto& draw : samplers) n += draw(rng);
                   const PulseRecord rec = simulate(n, rng);
                   result.s1[i] = rec.s1;
                   result.s2[i] = rec.s2;
                 });

  result.estimate = config.correction
                        ? [&] {
                            std::vector<PulseRecord> recs(
                                static_cast<std::size_t>(config.pulses));
                            for (std::int64_t i = 0; i < config.pulses; ++i) {
                              recs[static_cast<std::size_t>(i)] = {result.s1[i],
                                                                   result.s2[i]};
                            }
                            return estimate_g2(recs, *config.correction);
                          }()
                        : estimate_g2(result.s1, result.s2);
  result.mean_s1 = result.s1.mean();
  result.mean_s2 = result.s2.mean();
  result.noise_dominated =
      chain_noise_dominated(config.chain, source.mean_photons, twin);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

ScanResult run_scan(const ScanConfig& config) {
  if (config.points.empty()) {
    throw std::invalid_argument("scan needs at least one point");
  }
  if (!(config.profile_fwhm > 0.0)) {
    throw std::invalid_argument("profile FWHM must be positive");
  }
  if (config.pulses_per_point < 1000) {
    throw std::invalid_argument("pulses per point must be at least 1000");
  }
  validate_chain(config.chain);

  const ModeComposition thermal_modes = compose_fractional_m(
      config.base_m, config.mean_photons, DistKind::kThermal);
  const ModeComposition squeezed_modes = compose_fractional_m(
      config.base_m, config.mean_photons, DistKind::kSqueezedVacuum);
  const std::vector<ModeSampler> thermal_samplers = make_samplers(thermal_modes);
  const std::vector<ModeSampler> squeezed_samplers = make_samplers(squeezed_modes);
  const ChainSimulator simulate{config.chain, false};

  ScanResult result;
  result.points.resize(config.points.size());
  Eigen::ArrayXd s1(config.pulses_per_point), s2(config.pulses_per_point);
  for (std::size_t p = 0; p < config.points.size(); ++p) {
    const double x = config.points[p];
    const double dx = x - config.center;
    const double w = std::exp(-kFourLn2 * dx * dx /
                              (config.profile_fwhm * config.profile_fwhm));
    for_each_pulse(config.pulses_per_point, config.seed,
                   kScanSalt | static_cast<std::uint64_t>(p), config.threads,
                   [&](RngStream& rng, std::int64_t i) {
                     const bool degenerate = rng.u01() < w;
                     const auto& samplers =
                         degenerate ? squeezed_samplers : thermal_samplers;
                     double n = 0;
                     for (const auto& draw : samplers) n += draw(rng);
                     const PulseRecord rec = simulate(n, rng);
                     s1[i] = rec.s1;
                     s2[i] = rec.s2;
                   });
    const G2Estimate est = estimate_g2(s1, s2);
    result.points[p] = {x, est.g2, est.std_error};
  }

  std::vector<double> xs, ys, es;
  xs.reserve(result.points.size());
  for (const auto& pt : result.points) {
    xs.push_back(pt.coordinate);
    ys.push_back(pt.g2);
    es.push_back(pt.std_error > 0 ? pt.std_error : 1e-6);
  }
  try {
    result.fit = fit_gaussian(xs, ys, es);
    result.fit_ok = true;
  } catch (const NumericalError& err) {
    result.fit_ok = false;
    result.fit_message = err.what();
  } catch (const std::invalid_argument& err) {
    result.fit_ok = false;
    result.fit_message = err.what();
  }
  return result;
}

HistogramResult run_histogram(const HistogramConfig& config) {
  if (config.mean_signal_nvs < 0.0) {
    throw std::invalid_argument("mean signal must be nonnegative");
  }
  if (config.pulses < 2) {
    throw std::invalid_argument("pulses must be at least 2");
  }
  if (!(config.bin_width_nvs > 0.0)) {
    throw std::invalid_argument("bin width must be positive");
  }
  if (config.kind != DistKind::kThermal &&
      config.kind != DistKind::kSqueezedVacuum) {
    throw std::invalid_argument("histogram supports thermal and squeezed kinds");
  }
  if (!(config.detector.volts_per_photon > 0.0)) {
    throw std::invalid_argument("detector conversion must be positive");
  }

  const double mean_photons =
      config.mean_signal_nvs / config.detector.volts_per_photon;
  const double lo =
      config.range_lo.value_or(-20.0);
  const double hi =
      config.range_hi.value_or(25.0 * config.mean_signal_nvs + 50.0);
  if (!(hi > lo)) throw std::invalid_argument("histogram range is empty");

  const auto n_bins = static_cast<std::size_t>(
      std::ceil((hi - lo) / config.bin_width_nvs));

  HistogramResult result;
  result.bin_width = config.bin_width_nvs;
  result.bin_lo.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    result.bin_lo[i] = lo + static_cast<double>(i) * config.bin_width_nvs;
  }
  result.counts.assign(n_bins, 0);

  const bool with_light = mean_photons > 0.0;
  std::vector<ModeSampler> samplers;
  if (with_light) {
    samplers = make_samplers(
        compose_fractional_m(config.m, mean_photons, config.kind));
  }

  Eigen::ArrayXd photons;
  if (with_light) photons.resize(config.pulses);
  Eigen::ArrayXd signal(config.pulses);
  for_each_pulse(config.pulses, config.seed, kHistSalt, config.threads,
                 [&](RngStream& rng, std::int64_t i) {
                   double n = 0;
                   for (const auto& draw : samplers) n += draw(rng);
                   if (with_light) photons[i] = n;
                   signal[i] = detect(n, config.detector, rng);
                 });

  for (std::int64_t i = 0; i < config.pulses; ++i) {
    const double s = signal[i];
    if (s < lo) {
      ++result.underflow;
    } else {
      const auto bin =
          static_cast<std::size_t>((s - lo) / config.bin_width_nvs);
      if (bin >= n_bins) {
        ++result.overflow;
      } else {
        ++result.counts[bin];
      }
    }
  }
  result.probability.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    result.probability[i] = static_cast<double>(result.counts[i]) /
                            static_cast<double>(config.pulses);
  }
  result.mean_signal = signal.mean();
  if (with_light) result.photon_g2 = estimate_g2_photons(photons);

  // The single-mode envelope (scaled PMF envelope convolved with the noise
  // Gaussian); composed multimode envelopes are not overlaid.
  if (config.m == 1.0) {
    const double sigma = fwhm_to_sigma(config.detector.noise_fwhm);
    result.theory.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
      const double a = result.bin_lo[i];
      result.theory[i] = envelope_mass(config.kind, a,
                                       a + config.bin_width_nvs,
                                       config.mean_signal_nvs, sigma);
    }
  }
  return result;
}

HbtResult run_calibration(const CalibrationConfig& config) {
  HbtConfig hbt;
  hbt.kind = DistKind::kPoisson;
  hbt.mean_photons = config.mean_photons;
  hbt.m = config.m;
  hbt.pulses = config.pulses;
  hbt.seed = config.seed;
  hbt.threads = config.threads;
  hbt.chain.detector1 = config.detector;
  hbt.chain.detector2 = config.detector;
  return run_hbt(hbt);
}

}  // namespace bsv
