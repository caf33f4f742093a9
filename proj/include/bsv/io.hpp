#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsv/chain.hpp"
#include "bsv/scenarios.hpp"

namespace bsv {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

/// Shortest round-trip decimal form of a double (std::to_chars), so that a
/// rerun of the same manifest produces byte-identical text outputs.
std::string format_double(double value);

/// CSV with header pulse_index,s1_nvs,s2_nvs.
void write_records_csv(const std::filesystem::path& path,
                       std::span<const PulseRecord> records);
std::vector<PulseRecord> read_records_csv(const std::filesystem::path& path);

/// Binary stream of little-endian (s1, s2) pairs of 64-bit floats.
void write_records_binary(const std::filesystem::path& path,
                          std::span<const PulseRecord> records);
std::vector<PulseRecord> read_records_binary(const std::filesystem::path& path);

/// CSV with header coordinate,g2,std_error.
void write_scan_csv(const std::filesystem::path& path, const ScanResult& scan);

/// CSV with header bin_lo_nvs,bin_center_nvs,probability[,theory].
void write_histogram_csv(const std::filesystem::path& path,
                         const HistogramResult& hist);

/// CSV with header power_mw,signal,model_signal.
void write_gain_csv(const std::filesystem::path& path,
                    std::span<const double> powers,
                    std::span<const double> signals,
                    std::span<const double> model);

/// Serialized alongside every output as manifest.json. Re-running the
/// recorded command with the recorded parameters reproduces the outputs
/// bit-exactly (the duration field is informational).
struct RunManifest {
  std::string command;
  nlohmann::json parameters;
  std::uint64_t master_seed = 0;
  std::string artifact_version = kArtifactVersion;
  double duration_seconds = 0;

  nlohmann::json to_json() const;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// Writes <out>/manifest.json.
void write_manifest(const std::filesystem::path& out_dir,
                    const RunManifest& manifest);

}  // namespace bsv
