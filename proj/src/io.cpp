#include "bsv/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary record streams are little-endian");

namespace bsv {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_records_csv(const std::filesystem::path& path,
                       std::span<const PulseRecord> records) {
  auto out = open_out(path, false);
  out << "pulse_index,s1_nvs,s2_nvs\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << i << ',' << format_double(records[i].s1) << ','
        << format_double(records[i].s2) << '\n';
  }
}

std::vector<PulseRecord> read_records_csv(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  std::string line;
  std::getline(in, line);  // header
  std::vector<PulseRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("malformed record CSV line: " + line);
    }
    PulseRecord rec;
    rec.s1 = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    rec.s2 = std::stod(line.substr(c2 + 1));
    records.push_back(rec);
  }
  return records;
}

void write_records_binary(const std::filesystem::path& path,
                          std::span<const PulseRecord> records) {
  auto out = open_out(path, true);
  for (const auto& rec : records) {
    double pair[2] = {rec.s1, rec.s2};
    out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
  }
}

std::vector<PulseRecord> read_records_binary(
    const std::filesystem::path& path) {
  auto in = open_in(path, true);
  std::vector<PulseRecord> records;
  double pair[2];
  while (in.read(reinterpret_cast<char*>(pair), sizeof(pair))) {
    records.push_back({pair[0], pair[1]});
  }
  if (in.gcount() != 0) {
    throw std::runtime_error("truncated binary record stream: " +
                             path.string());
  }
  return records;
}

void write_scan_csv(const std::filesystem::path& path, const ScanResult& scan) {
  auto out = open_out(path, false);
  out << "coordinate,g2,std_error\n";
  for (const auto& pt : scan.points) {
    out << format_double(pt.coordinate) << ',' << format_double(pt.g2) << ','
        << format_double(pt.std_error) << '\n';
  }
}

void write_histogram_csv(const std::filesystem::path& path,
                         const HistogramResult& hist) {
  auto out = open_out(path, false);
  const bool with_theory = !hist.theory.empty();
  out << "bin_lo_nvs,bin_center_nvs,probability";
  if (with_theory) out << ",theory";
  out << '\n';
  for (std::size_t i = 0; i < hist.bin_lo.size(); ++i) {
    out << format_double(hist.bin_lo[i]) << ','
        << format_double(hist.bin_lo[i] + 0.5 * hist.bin_width) << ','
        << format_double(hist.probability[i]);
    if (with_theory) out << ',' << format_double(hist.theory[i]);
    out << '\n';
  }
}

void write_gain_csv(const std::filesystem::path& path,
                    std::span<const double> powers,
                    std::span<const double> signals,
                    std::span<const double> model) {
  auto out = open_out(path, false);
  out << "power_mw,signal,model_signal\n";
  for (std::size_t i = 0; i < powers.size(); ++i) {
    out << format_double(powers[i]) << ',' << format_double(signals[i]) << ','
        << format_double(model[i]) << '\n';
  }
}

nlohmann::json RunManifest::to_json() const {
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"command", command},
                        {"parameters", parameters},
                        {"master_seed", master_seed},
                        {"artifact_version", artifact_version},
                        {"duration_seconds", duration_seconds}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path, false);
  out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path, false);
  nlohmann::json doc;
  in >> doc;
  return doc;
}

void write_manifest(const std::filesystem::path& out_dir,
                    const RunManifest& manifest) {
  write_json(out_dir / "manifest.json", manifest.to_json());
}

}  // namespace bsv
