// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msfbm/model.hpp"

namespace msfbm::cli {

// Layered INI-style key-value text:
//   [section]
//   key = value      # trailing comments with '#' or ';'
// Later occurrences of a key override earlier ones.
class ConfigFile {
 public:
  static ConfigFile parse_text(const std::string& text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  std::vector<double> get_list(const std::string& section,
                               const std::string& key) const;
  void set(const std::string& section, const std::string& key,
           const std::string& value);

  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string text_;
};

struct LadderSpec {
  std::vector<double> eps;               // strictly decreasing
  std::string eta_rule = "equal";        // equal | regime
};

struct RunSpec {
  double horizon = 1.0;
  int n = 200;
  int n_paths = 1000;
  double p = 2.0;
  std::uint64_t seed = 12345;
  double hurst = 0.75;
};

// Fully-resolved experiment description built from a ConfigFile plus CLI
// overrides.
struct ExperimentConfig {
  ModelSpec model;
  LadderSpec ladder;
  RunSpec run;
  double lambda = 0.0;
  double kappa = 0.0;
  bool has_regime = false;
  std::string out_dir = "out";
  std::string format = "csv";  // csv | csv+svg
  std::uint64_t config_hash = 0;
  int threads = 0;

  static ExperimentConfig from_config(const ConfigFile& file);
};

}  // namespace msfbm::cli
