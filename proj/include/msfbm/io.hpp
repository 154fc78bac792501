// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace msfbm {

// Shortest decimal that round-trips the IEEE-754 double exactly.
std::string format_double(double v);

struct CsvTable {
  std::string header;                     // comma-separated column names
  std::vector<std::vector<double>> rows;  // numeric cells only
};

// Collects every emitted data file so the run manifest can list them all.
class OutputSink {
 public:
  explicit OutputSink(std::filesystem::path dir);

  void write_csv(const std::string& name, const CsvTable& table);
  void write_text(const std::string& name, const std::string& content);
  std::filesystem::path dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

  // manifest.json with config hash, seed, version, and the file list.
  void write_manifest(const std::string& command, std::uint64_t config_hash,
                      std::uint64_t seed);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::uint64_t fnv1a_hash(std::span<const char> bytes);

// Minimal static plots.
void write_loglog_svg(OutputSink& sink, const std::string& name,
                      std::span<const double> xs, std::span<const double> ys,
                      double slope, double intercept, const std::string& title);
void write_cdf_overlay_svg(OutputSink& sink, const std::string& name,
                           std::span<const double> sample_a,
                           std::span<const double> sample_b,
                           const std::string& title);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace msfbm
