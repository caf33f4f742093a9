#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "bsv/distributions.hpp"
#include "bsv/errors.hpp"
#include "bsv/estimator.hpp"
#include "bsv/gain.hpp"
#include "bsv/io.hpp"
#include "bsv/modes.hpp"
#include "bsv/peak_fit.hpp"
#include "bsv/scenarios.hpp"

namespace {

using nlohmann::json;

constexpr int kExitBadArguments = 2;
constexpr int kExitNumericalFailure = 3;

struct CommonOpts {
  std::int64_t pulses = 1'000'000;
  std::uint64_t seed = 1;
  std::string out = "out";
  double m = 1.0;
  int threads = 1;
};

void add_common(CLI::App* sub, CommonOpts& opts, double default_m,
                const std::string& m_help,
                std::int64_t default_pulses = 1'000'000,
                const std::string& pulses_help = "Number of pulses") {
  opts.m = default_m;
  opts.pulses = default_pulses;
  sub->add_option("--pulses", opts.pulses, pulses_help)
      ->capture_default_str();
  sub->add_option("--seed", opts.seed, "Master seed; all randomness derives from it")
      ->capture_default_str();
  sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
  sub->add_option("--m", opts.m, m_help)->capture_default_str();
  sub->add_option("--threads", opts.threads,
                  "Worker threads (results are identical for any count)")
      ->capture_default_str();
}

struct DetectorOpts {
  double volts_per_photon = 70.0 / 8000.0;
  double noise_fwhm = 10.0;
  bool noiseless = false;
};

void add_detector(CLI::App* sub, DetectorOpts& opts) {
  sub->add_option("--volts-per-photon", opts.volts_per_photon,
                  "Detector conversion, nV*s per photon")
      ->capture_default_str();
  sub->add_option("--noise-fwhm", opts.noise_fwhm,
                  "Electronic noise FWHM, nV*s")
      ->capture_default_str();
  sub->add_flag("--noiseless", opts.noiseless, "Disable electronic noise");
}

bsv::Detector make_detector(const DetectorOpts& opts) {
  return {opts.volts_per_photon, opts.noiseless ? 0.0 : opts.noise_fwhm};
}

const std::map<std::string, bsv::DistKind> kKindNames{
    {"thermal", bsv::DistKind::kThermal},
    {"squeezed", bsv::DistKind::kSqueezedVacuum},
    {"poisson", bsv::DistKind::kPoisson},
    {"twin", bsv::DistKind::kTwinBeamJoint}};

std::string kind_name(bsv::DistKind kind) {
  for (const auto& [name, value] : kKindNames) {
    if (value == kind) return name;
  }
  return "unknown";
}

json detector_json(const bsv::Detector& det) {
  return {{"volts_per_photon", det.volts_per_photon},
          {"noise_fwhm", det.noise_fwhm}};
}

void finalize(const std::filesystem::path& out_dir, const std::string& command,
              const json& params, std::uint64_t seed, double seconds,
              const json& results) {
  bsv::RunManifest manifest;
  manifest.command = command;
  manifest.parameters = params;
  manifest.master_seed = seed;
  manifest.duration_seconds = seconds;
  bsv::write_manifest(out_dir, manifest);

  json summary{{"schema_version", bsv::kSchemaVersion},
               {"command", command},
               {"parameters", params},
               {"results", results}};
  bsv::write_json(out_dir / "summary.json", summary);
}

std::vector<bsv::PulseRecord> to_records(const Eigen::ArrayXd& s1,
                                         const Eigen::ArrayXd& s2) {
  std::vector<bsv::PulseRecord> records(static_cast<std::size_t>(s1.size()));
  for (Eigen::Index i = 0; i < s1.size(); ++i) {
    records[static_cast<std::size_t>(i)] = {s1[i], s2[i]};
  }
  return records;
}

// --------------------------------------------------------------------------
// hbt

struct HbtOpts {
  CommonOpts common;
  DetectorOpts detector;
  std::string kind = "thermal";
  double mean = 1.0;
  double eta = 1.0;
  double split_t = 0.5;
  std::string dump = "none";
  bool noise_corrected = false;
  double pedestal1 = 0, pedestal2 = 0, noise_cov = 0;
};

int run_hbt_command(const HbtOpts& opts) {
  bsv::HbtConfig config;
  config.kind = kKindNames.at(opts.kind);
  config.mean_photons = opts.mean;
  config.m = opts.common.m;
  config.pulses = opts.common.pulses;
  config.seed = opts.common.seed;
  config.threads = opts.common.threads;
  config.chain.loss_eta = opts.eta;
  config.chain.beamsplitter_t = opts.split_t;
  config.chain.detector1 = make_detector(opts.detector);
  config.chain.detector2 = config.chain.detector1;
  if (opts.noise_corrected) {
    config.correction =
        bsv::NoiseCorrection{opts.pedestal1, opts.pedestal2, opts.noise_cov};
  }

  const bsv::HbtResult result = bsv::run_hbt(config);

  const json params{{"kind", opts.kind},
                    {"mean_photons", opts.mean},
                    {"m", opts.common.m},
                    {"pulses", opts.common.pulses},
                    {"seed", opts.common.seed},
                    {"threads", opts.common.threads},
                    {"loss_eta", opts.eta},
                    {"beamsplitter_t", opts.split_t},
                    {"detector", detector_json(config.chain.detector1)},
                    {"noise_corrected", opts.noise_corrected},
                    {"dump_records", opts.dump}};
  const json results{{"g2", result.estimate.g2},
                     {"std_error", result.estimate.std_error},
                     {"mean_s1_nvs", result.mean_s1},
                     {"mean_s2_nvs", result.mean_s2},
                     {"noise_dominated", result.noise_dominated},
                     {"seconds", result.seconds}};
  const std::filesystem::path out_dir(opts.common.out);
  finalize(out_dir, "hbt", params, opts.common.seed, result.seconds, results);
  if (opts.dump == "csv" || opts.dump == "both") {
    bsv::write_records_csv(out_dir / "records.csv",
                           to_records(result.s1, result.s2));
  }
  if (opts.dump == "bin" || opts.dump == "both") {
    bsv::write_records_binary(out_dir / "records.bin",
                              to_records(result.s1, result.s2));
  }

  std::printf("g2 = %.4f +- %.4f  (%s, N=%g, %lld pulses%s)\n",
              result.estimate.g2, result.estimate.std_error,
              opts.kind.c_str(), opts.mean,
              static_cast<long long>(opts.common.pulses),
              result.noise_dominated ? ", noise dominated" : "");
  return 0;
}

// --------------------------------------------------------------------------
// scan

struct ScanOpts {
  CommonOpts common;
  DetectorOpts detector;
  double from = 0, to = 0, center = 0, fwhm = 0;
  int steps = 41;
  double mean = 8000;
  double split_t = 0.5;
  double eta = 1.0;
};

int run_scan_command(const ScanOpts& opts, bsv::ScanCoordinate coordinate,
                     const std::string& command) {
  bsv::ScanConfig config;
  config.coordinate = coordinate;
  config.center = opts.center;
  config.profile_fwhm = opts.fwhm;
  config.pulses_per_point = opts.common.pulses;
  config.base_m = opts.common.m;
  config.mean_photons = opts.mean;
  config.seed = opts.common.seed;
  config.threads = opts.common.threads;
  config.chain.loss_eta = opts.eta;
  config.chain.beamsplitter_t = opts.split_t;
  config.chain.detector1 = make_detector(opts.detector);
  config.chain.detector2 = config.chain.detector1;
  if (opts.steps < 2) throw std::invalid_argument("need at least 2 scan steps");
  config.points.resize(static_cast<std::size_t>(opts.steps));
  for (int i = 0; i < opts.steps; ++i) {
    config.points[static_cast<std::size_t>(i)] =
        opts.from + (opts.to - opts.from) * i / (opts.steps - 1.0);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const bsv::ScanResult result = bsv::run_scan(config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const char* unit =
      coordinate == bsv::ScanCoordinate::kAngleMrad ? "mrad" : "nm";
  const json params{{"from", opts.from},
                    {"to", opts.to},
                    {"steps", opts.steps},
                    {"center", opts.center},
                    {"profile_fwhm", opts.fwhm},
                    {"mean_photons", opts.mean},
                    {"m", opts.common.m},
                    {"pulses_per_point", opts.common.pulses},
                    {"seed", opts.common.seed},
                    {"threads", opts.common.threads},
                    {"loss_eta", opts.eta},
                    {"beamsplitter_t", opts.split_t},
                    {"detector", detector_json(config.chain.detector1)},
                    {"unit", unit}};
  json results{{"fit_ok", result.fit_ok}};
  if (result.fit_ok) {
    results["fit"] = {{"baseline", result.fit.baseline},
                      {"baseline_err", result.fit.baseline_err},
                      {"amplitude", result.fit.amplitude},
                      {"amplitude_err", result.fit.amplitude_err},
                      {"center", result.fit.center},
                      {"center_err", result.fit.center_err},
                      {"fwhm", result.fit.fwhm},
                      {"fwhm_err", result.fit.fwhm_err},
                      {"degenerate", result.fit.degenerate},
                      {"chi2", result.fit.chi2}};
  } else {
    results["fit_message"] = result.fit_message;
  }
  const std::filesystem::path out_dir(opts.common.out);
  bsv::write_scan_csv(out_dir / "scan.csv", result);
  finalize(out_dir, command, params, opts.common.seed, seconds, results);

  if (!result.fit_ok) {
    std::fprintf(stderr, "scan fit failed: %s (raw points in scan.csv)\n",
                 result.fit_message.c_str());
    return kExitNumericalFailure;
  }
  std::printf(
      "fwhm = %.3f +- %.3f %s, center = %.3f, baseline = %.3f, peak = %.3f\n",
      result.fit.fwhm, result.fit.fwhm_err, unit, result.fit.center,
      result.fit.baseline, result.fit.baseline + result.fit.amplitude);
  return 0;
}

// --------------------------------------------------------------------------
// histogram

struct HistOpts {
  CommonOpts common;
  DetectorOpts detector;
  std::string kind = "thermal";
  double mean_signal = 70.0;
  double bin_width = 2.0;
  double range_lo = 0, range_hi = 0;
  bool has_lo = false, has_hi = false;
};

int run_histogram_command(const HistOpts& opts) {
  bsv::HistogramConfig config;
  config.kind = kKindNames.at(opts.kind);
  config.mean_signal_nvs = opts.mean_signal;
  config.pulses = opts.common.pulses;
  config.detector = make_detector(opts.detector);
  config.bin_width_nvs = opts.bin_width;
  config.m = opts.common.m;
  if (opts.has_lo) config.range_lo = opts.range_lo;
  if (opts.has_hi) config.range_hi = opts.range_hi;
  config.seed = opts.common.seed;
  config.threads = opts.common.threads;

  const auto t0 = std::chrono::steady_clock::now();
  const bsv::HistogramResult result = bsv::run_histogram(config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const json params{{"kind", opts.kind},
                    {"mean_signal_nvs", opts.mean_signal},
                    {"bin_width_nvs", opts.bin_width},
                    {"m", opts.common.m},
                    {"pulses", opts.common.pulses},
                    {"seed", opts.common.seed},
                    {"threads", opts.common.threads},
                    {"detector", detector_json(config.detector)}};
  json results{{"mean_signal_nvs", result.mean_signal},
               {"underflow", result.underflow},
               {"overflow", result.overflow},
               {"bins", result.bin_lo.size()},
               {"seconds", seconds}};
  if (result.photon_g2) {
    results["photon_g2"] = result.photon_g2->g2;
    results["photon_g2_std_error"] = result.photon_g2->std_error;
  }
  const std::filesystem::path out_dir(opts.common.out);
  bsv::write_histogram_csv(out_dir / "histogram.csv", result);
  finalize(out_dir, "histogram", params, opts.common.seed, seconds, results);

  std::printf("histogram: %zu bins, mean signal %.3f nV*s", result.bin_lo.size(),
              result.mean_signal);
  if (result.photon_g2) {
    std::printf(", photon g2 = %.4f +- %.4f", result.photon_g2->g2,
                result.photon_g2->std_error);
  }
  std::printf("\n");
  return 0;
}

// --------------------------------------------------------------------------
// calibrate

struct CalibrateOpts {
  CommonOpts common;
  DetectorOpts detector;
  double mean = 8000;
};

int run_calibrate_command(const CalibrateOpts& opts) {
  bsv::CalibrationConfig config;
  config.mean_photons = opts.mean;
  config.pulses = opts.common.pulses;
  config.detector = make_detector(opts.detector);
  config.m = opts.common.m;
  config.seed = opts.common.seed;
  config.threads = opts.common.threads;

  const bsv::HbtResult result = bsv::run_calibration(config);

  const json params{{"mean_photons", opts.mean},
                    {"m", opts.common.m},
                    {"pulses", opts.common.pulses},
                    {"seed", opts.common.seed},
                    {"threads", opts.common.threads},
                    {"detector", detector_json(config.detector)}};
  const json results{{"g2", result.estimate.g2},
                     {"std_error", result.estimate.std_error},
                     {"mean_s1_nvs", result.mean_s1},
                     {"mean_s2_nvs", result.mean_s2},
                     {"noise_dominated", result.noise_dominated},
                     {"seconds", result.seconds}};
  finalize(opts.common.out, "calibrate", params, opts.common.seed,
           result.seconds, results);

  std::printf("g2_coh = %.4f +- %.4f  (N=%g, %lld pulses%s)\n",
              result.estimate.g2, result.estimate.std_error, opts.mean,
              static_cast<long long>(opts.common.pulses),
              result.noise_dominated ? ", noise dominated" : "");
  return 0;
}

// --------------------------------------------------------------------------
// gain-fit

struct GainFitOpts {
  CommonOpts common;
  std::string data;
  bool synth = false;
  double gamma_max = 15.8;
  double scale = 1.0;
  int points = 15;
  double noise = 0.01;
  double power_min = 5.0;
  double power_max = 75.0;
};

int run_gain_fit_command(const GainFitOpts& opts) {
  std::vector<double> powers, signals;
  if (opts.data.empty() && !opts.synth) {
    throw std::invalid_argument("gain-fit needs --data FILE or --synth");
  }
  if (!opts.data.empty()) {
    std::ifstream in(opts.data);
    if (!in) throw std::invalid_argument("cannot open " + opts.data);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      try {
        const double p = std::stod(line.substr(0, comma));
        const double s = std::stod(line.substr(comma + 1));
        powers.push_back(p);
        signals.push_back(s);
      } catch (const std::exception&) {
        continue;  // header or comment line
      }
    }
  } else {
    if (opts.points < 5) {
      throw std::invalid_argument("synthetic curve needs at least 5 points");
    }
    bsv::RngStream rng(opts.common.seed, 0x67ull << 32);
    for (int i = 0; i < opts.points; ++i) {
      const double p = opts.power_min + (opts.power_max - opts.power_min) * i /
                                            (opts.points - 1.0);
      const double u = std::sqrt(p / opts.power_max);
      double s = opts.scale * std::pow(std::sinh(opts.gamma_max * u), 2.0);
      if (opts.noise > 0) s *= 1.0 + opts.noise * rng.normal();
      powers.push_back(p);
      signals.push_back(std::max(s, 1e-300));
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const bsv::GainFitResult fit = bsv::fit_gain(powers, signals);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::vector<double> model(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double u = std::sqrt(powers[i] / powers.back());
    model[i] = fit.scale * std::pow(std::sinh(fit.gamma_max * u), 2.0);
  }

  json params{{"seed", opts.common.seed}, {"synthetic", opts.synth}};
  if (opts.synth) {
    params["gamma_max"] = opts.gamma_max;
    params["scale"] = opts.scale;
    params["points"] = opts.points;
    params["noise"] = opts.noise;
    params["power_min_mw"] = opts.power_min;
    params["power_max_mw"] = opts.power_max;
  } else {
    params["data"] = opts.data;
  }
  const json results{{"gamma_max", fit.gamma_max},
                     {"scale", fit.scale},
                     {"residual_norm", fit.residual_norm},
                     {"degenerate", fit.degenerate},
                     {"iterations", fit.iterations},
                     {"mean_photons_at_max", bsv::mean_photons_from_gain(fit.gamma_max)}};
  const std::filesystem::path out_dir(opts.common.out);
  bsv::write_gain_csv(out_dir / "gainfit.csv", powers, signals, model);
  finalize(out_dir, "gain-fit", params, opts.common.seed, seconds, results);

  std::printf("Gamma_max = %.3f, A = %.4g, residual = %.3g%s\n", fit.gamma_max,
              fit.scale, fit.residual_norm,
              fit.degenerate ? " (degenerate: low-gain data)" : "");
  return 0;
}

// --------------------------------------------------------------------------
// modes

struct ModesOpts {
  CommonOpts common;
  bsv::ModeGeometry geometry{};
  double theta_det_mrad = 0.45;
  double theta_mode_mrad = 4.1;
  double total_mean = 1000;
};

int run_modes_command(const ModesOpts& opts) {
  bsv::ModeGeometry geometry = opts.geometry;
  geometry.detected_angle = opts.theta_det_mrad * 1e-3;
  geometry.mode_angle_fwhm = opts.theta_mode_mrad * 1e-3;
  const double m_geometry = bsv::effective_mode_count(geometry);

  const bsv::ModeComposition comp = bsv::compose_fractional_m(
      opts.common.m, opts.total_mean, bsv::DistKind::kThermal);
  const double m_eff = bsv::effective_m(comp);

  const auto t0 = std::chrono::steady_clock::now();
  json mc;
  if (opts.common.pulses > 0) {
    // Monte-Carlo check: summed thermal modes must show the washed-out g2.
    bsv::RngStream rng(opts.common.seed, 0x6dull << 32);
    Eigen::ArrayXd totals = Eigen::ArrayXd::Zero(opts.common.pulses);
    for (const double mean : comp.per_mode_means) {
      totals += bsv::sample(bsv::thermal(mean), rng, opts.common.pulses);
    }
    const bsv::G2Estimate est = bsv::estimate_g2_photons(totals);
    mc = {{"g2", est.g2},
          {"std_error", est.std_error},
          {"expected", bsv::reduce_g2(2.0, m_eff)}};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const json params{{"m", opts.common.m},
                    {"total_mean", opts.total_mean},
                    {"pulses", opts.common.pulses},
                    {"seed", opts.common.seed},
                    {"theta_det_mrad", opts.theta_det_mrad},
                    {"theta_mode_mrad", opts.theta_mode_mrad},
                    {"dlambda_det_nm", geometry.detected_bandwidth},
                    {"dlambda_mode_nm", geometry.mode_bandwidth}};
  json results{{"geometry_mode_count", m_geometry},
               {"coherence_volume_m3", bsv::coherence_volume(geometry)},
               {"detection_volume_m3", bsv::detection_volume(geometry)},
               {"composition", comp.per_mode_means},
               {"composition_effective_m", m_eff},
               {"reduced_thermal_g2", bsv::reduce_g2(2.0, opts.common.m)}};
  if (!mc.is_null()) results["monte_carlo"] = mc;
  finalize(opts.common.out, "modes", params, opts.common.seed, seconds,
           results);

  std::printf("geometry m = %.4g; composition m = %.6f (", m_geometry, m_eff);
  for (std::size_t i = 0; i < comp.per_mode_means.size(); ++i) {
    std::printf(i ? ", %.4g" : "%.4g", comp.per_mode_means[i]);
  }
  std::printf(")\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bsvsim: photon statistics of bright squeezed vacuum from "
               "high-gain parametric down-conversion"};
  app.set_version_flag("--version", bsv::kArtifactVersion);
  app.set_config("--config", "",
                 "INI config file; command line flags override it, and it "
                 "overrides built-in defaults");
  app.require_subcommand(1);

  HbtOpts hbt;
  auto* hbt_cmd = app.add_subcommand(
      "hbt", "Hanbury Brown-Twiss g2 measurement of one source");
  add_common(hbt_cmd, hbt.common, 1.0, "Effective detected modes");
  add_detector(hbt_cmd, hbt.detector);
  hbt_cmd->add_option("--kind", hbt.kind, "Source statistics")
      ->transform(CLI::IsMember({"thermal", "squeezed", "poisson", "twin"}))
      ->capture_default_str();
  hbt_cmd->add_option("--mean", hbt.mean, "Mean photons per pulse")
      ->capture_default_str();
  hbt_cmd->add_option("--eta", hbt.eta, "Optical loss transmission in (0,1]")
      ->capture_default_str();
  hbt_cmd->add_option("--split-t", hbt.split_t, "Beamsplitter transmittance")
      ->capture_default_str();
  hbt_cmd->add_option("--dump-records", hbt.dump, "Write per-pulse records")
      ->transform(CLI::IsMember({"none", "csv", "bin", "both"}))
      ->capture_default_str();
  hbt_cmd->add_flag("--noise-corrected", hbt.noise_corrected,
                    "Diagnostic estimator with pedestal/covariance removal");
  hbt_cmd->add_option("--pedestal1", hbt.pedestal1, "Channel 1 pedestal, nV*s")
      ->capture_default_str();
  hbt_cmd->add_option("--pedestal2", hbt.pedestal2, "Channel 2 pedestal, nV*s")
      ->capture_default_str();
  hbt_cmd->add_option("--noise-cov", hbt.noise_cov,
                      "Cross-channel noise covariance, (nV*s)^2")
      ->capture_default_str();

  ScanOpts angle;
  angle.from = -10.0;
  angle.to = 10.0;
  angle.center = 0.0;
  angle.fwhm = 4.1;
  auto* angle_cmd = app.add_subcommand(
      "scan-angle", "g2 versus detection angle across the correlation area");
  add_common(angle_cmd, angle.common, 1.25, "Effective detected modes",
             100'000, "Pulses per scan point");
  add_detector(angle_cmd, angle.detector);
  angle_cmd->add_option("--from", angle.from, "Scan start, mrad")
      ->capture_default_str();
  angle_cmd->add_option("--to", angle.to, "Scan end, mrad")
      ->capture_default_str();
  angle_cmd->add_option("--steps", angle.steps, "Number of scan points")
      ->capture_default_str();
  angle_cmd->add_option("--center", angle.center, "Degenerate direction, mrad")
      ->capture_default_str();
  angle_cmd->add_option("--fwhm", angle.fwhm, "Correlation-area FWHM, mrad")
      ->capture_default_str();
  angle_cmd->add_option("--mean", angle.mean, "Mean photons per pulse")
      ->capture_default_str();
  angle_cmd->add_option("--eta", angle.eta, "Optical loss transmission")
      ->capture_default_str();
  angle_cmd->add_option("--split-t", angle.split_t, "Beamsplitter transmittance")
      ->capture_default_str();

  ScanOpts wavelength;
  wavelength.from = 708.6;
  wavelength.to = 710.0;
  wavelength.center = 709.3;
  wavelength.fwhm = 0.22;
  auto* wl_cmd = app.add_subcommand(
      "scan-wavelength", "g2 versus wavelength across the degenerate point");
  add_common(wl_cmd, wavelength.common, 1.25, "Effective detected modes",
             100'000, "Pulses per scan point");
  add_detector(wl_cmd, wavelength.detector);
  wl_cmd->add_option("--from", wavelength.from, "Scan start, nm")
      ->capture_default_str();
  wl_cmd->add_option("--to", wavelength.to, "Scan end, nm")
      ->capture_default_str();
  wl_cmd->add_option("--steps", wavelength.steps, "Number of scan points")
      ->capture_default_str();
  wl_cmd->add_option("--center", wavelength.center, "Degenerate wavelength, nm")
      ->capture_default_str();
  wl_cmd->add_option("--fwhm", wavelength.fwhm, "Spectral correlation FWHM, nm")
      ->capture_default_str();
  wl_cmd->add_option("--mean", wavelength.mean, "Mean photons per pulse")
      ->capture_default_str();
  wl_cmd->add_option("--eta", wavelength.eta, "Optical loss transmission")
      ->capture_default_str();
  wl_cmd->add_option("--split-t", wavelength.split_t,
                     "Beamsplitter transmittance")
      ->capture_default_str();

  HistOpts hist;
  auto* hist_cmd = app.add_subcommand(
      "histogram", "Signal probability distribution of detected light");
  add_common(hist_cmd, hist.common, 1.0, "Effective detected modes");
  add_detector(hist_cmd, hist.detector);
  hist_cmd->add_option("--kind", hist.kind, "Source statistics")
      ->transform(CLI::IsMember({"thermal", "squeezed"}))
      ->capture_default_str();
  hist_cmd->add_option("--mean-signal", hist.mean_signal,
                       "Mean signal, nV*s (0 = noise-only run)")
      ->capture_default_str();
  hist_cmd->add_option("--bin-width", hist.bin_width, "Bin width, nV*s")
      ->capture_default_str();
  auto* lo_opt =
      hist_cmd->add_option("--range-lo", hist.range_lo, "Histogram low edge");
  auto* hi_opt =
      hist_cmd->add_option("--range-hi", hist.range_hi, "Histogram high edge");

  CalibrateOpts calibrate;
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "Coherent-light calibration of the measurement chain");
  add_common(cal_cmd, calibrate.common, 1.0, "Effective detected modes");
  add_detector(cal_cmd, calibrate.detector);
  cal_cmd->add_option("--mean", calibrate.mean, "Mean photons per pulse")
      ->capture_default_str();

  GainFitOpts gain;
  auto* gain_cmd = app.add_subcommand(
      "gain-fit", "Fit the parametric gain from a PDC signal-vs-power curve");
  add_common(gain_cmd, gain.common, 1.0, "(unused by this subcommand)");
  gain_cmd->add_option("--data", gain.data,
                       "CSV of power_mw,signal rows to fit");
  gain_cmd->add_flag("--synth", gain.synth,
                     "Fit a synthetic curve generated from --gamma-max");
  gain_cmd->add_option("--gamma-max", gain.gamma_max,
                       "Gain at maximum power for --synth")
      ->capture_default_str();
  gain_cmd->add_option("--scale", gain.scale, "Amplitude for --synth")
      ->capture_default_str();
  gain_cmd->add_option("--points", gain.points, "Points for --synth")
      ->capture_default_str();
  gain_cmd->add_option("--noise", gain.noise,
                       "Multiplicative noise for --synth")
      ->capture_default_str();
  gain_cmd->add_option("--power-min", gain.power_min, "Lowest pump power, mW")
      ->capture_default_str();
  gain_cmd->add_option("--power-max", gain.power_max, "Highest pump power, mW")
      ->capture_default_str();

  ModesOpts modes;
  auto* modes_cmd = app.add_subcommand(
      "modes", "Mode geometry, effective mode count and fractional-m composition");
  add_common(modes_cmd, modes.common, 1.25, "Target effective mode count", 0,
             "If > 0, Monte-Carlo check of the composed g2");
  modes_cmd->add_option("--theta-det", modes.theta_det_mrad,
                        "Detected angle, mrad")
      ->capture_default_str();
  modes_cmd->add_option("--theta-mode", modes.theta_mode_mrad,
                        "Angular mode size FWHM, mrad")
      ->capture_default_str();
  modes_cmd->add_option("--dlambda-det", modes.geometry.detected_bandwidth,
                        "Detected bandwidth, nm")
      ->capture_default_str();
  modes_cmd->add_option("--dlambda-mode", modes.geometry.mode_bandwidth,
                        "Spectral mode size, nm")
      ->capture_default_str();
  modes_cmd->add_option("--tau-coh", modes.geometry.coherence_time,
                        "Coherence time, s")
      ->capture_default_str();
  modes_cmd->add_option("--tau-det", modes.geometry.detection_time,
                        "Detection time, s")
      ->capture_default_str();
  modes_cmd->add_option("--total-mean", modes.total_mean,
                        "Total mean photons for the composition")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return kExitBadArguments;
  }

  hist.has_lo = lo_opt->count() > 0;
  hist.has_hi = hi_opt->count() > 0;

  try {
    if (hbt_cmd->parsed()) return run_hbt_command(hbt);
    if (angle_cmd->parsed()) {
      return run_scan_command(angle, bsv::ScanCoordinate::kAngleMrad,
                              "scan-angle");
    }
    if (wl_cmd->parsed()) {
      return run_scan_command(wavelength, bsv::ScanCoordinate::kWavelengthNm,
                              "scan-wavelength");
    }
    if (hist_cmd->parsed()) return run_histogram_command(hist);
    if (cal_cmd->parsed()) return run_calibrate_command(calibrate);
    if (gain_cmd->parsed()) return run_gain_fit_command(gain);
    if (modes_cmd->parsed()) return run_modes_command(modes);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadArguments;
  } catch (const bsv::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return 0;
}
