// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "expr.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/io.hpp"

namespace msfbm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
  ConfigFile cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    cfg.sections_[section][key] = value;  // later keys override
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section,
                            const std::string& key) const {
  if (!has(section, key))
    throw ConfigError("config: missing key " + section + "." + key);
  return sections_.at(section).at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key) const {
  const std::string v = get(section, key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + section + "." + key + " = '" + v +
                      "' is not a number");
  }
}

double ConfigFile::get_double_or(const std::string& section,
                                 const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int_or(const std::string& section,
                                    const std::string& key,
                                    std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const double d = get_double(section, key);
  if (d != std::floor(d))
    throw ConfigError("config: " + section + "." + key + " must be an integer");
  return static_cast<std::int64_t>(d);
}

std::vector<double> ConfigFile::get_list(const std::string& section,
                                         const std::string& key) const {
  std::string v = get(section, key);
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  std::vector<double> out;
  double d;
  while (in >> d) out.push_back(d);
  if (out.empty())
    throw ConfigError("config: " + section + "." + key + " holds no numbers");
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
  sections_[section][key] = value;
  text_ += "\n" + section + "." + key + "=" + value;
}

namespace {

CoefXY wrap_xy(const CoefficientExpr& e) {
  return [e](std::span<const double> x, std::span<const double> y,
             std::span<double> out) {
    try {
      out[0] = e.eval(x[0], y[0]);
    } catch (const EvalError& err) {
      throw NumericalError(std::string("expression evaluation: ") + err.what());
    }
  };
}

CoefY wrap_y(const CoefficientExpr& e) {
  return [e](std::span<const double> y, std::span<double> out) {
    try {
      out[0] = e.eval(0.0, y[0]);
    } catch (const EvalError& err) {
      throw NumericalError(std::string("expression evaluation: ") + err.what());
    }
  };
}

ModelSpec model_from_config(const ConfigFile& file) {
  if (file.has("model", "name")) return make_registry_model(file.get("model", "name"));

  // inline scalar model from coefficient expressions
  ModelSpec m;
  m.name = "inline";
  m.dim_x = 1;
  m.dim_y = 1;
  for (const char* key : {"c", "sigma", "f", "tau"})
    if (!file.has("model", key))
      throw ConfigError(std::string("config: inline model needs model.") + key);
  m.c = wrap_xy(CoefficientExpr::parse(file.get("model", "c")));
  m.sigma = wrap_y(CoefficientExpr::parse(file.get("model", "sigma")));
  m.f = wrap_y(CoefficientExpr::parse(file.get("model", "f")));
  m.tau = wrap_y(CoefficientExpr::parse(file.get("model", "tau")));
  if (file.has("model", "b"))
    m.b = wrap_xy(CoefficientExpr::parse(file.get("model", "b")));
  if (file.has("model", "g"))
    m.g = wrap_y(CoefficientExpr::parse(file.get("model", "g")));

  m.meta.growth_k = file.get_double_or("model", "growth_k", 2.0);
  m.meta.growth_q = file.get_double_or("model", "growth_q", 2.0);
  m.meta.growth_r = file.get_double_or("model", "growth_r", 0.5);
  m.meta.alpha = file.get_double_or("model", "alpha", 0.9);
  m.meta.beta = file.get_double_or("model", "beta", 2.0);
  m.meta.gamma = file.get_double_or("model", "gamma", 0.0);
  m.meta.bounded_grad_x_c =
      file.get_int_or("model", "bounded_grad_x_c", 1) != 0;
  m.meta.sup_tau_sq = file.get_double_or("model", "sup_tau_sq", 1.0);
  m.meta.relax_time = file.get_double_or("model", "relax_time", 1.0);
  return m;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& file) {
  ExperimentConfig cfg;
  cfg.model = model_from_config(file);

  if (file.has("scales", "eps_list")) {
    cfg.ladder.eps = file.get_list("scales", "eps_list");
  } else {
    const double eps0 = file.get_double_or("scales", "eps0", 1.0 / 16.0);
    const double ratio = file.get_double_or("scales", "ratio", 0.5);
    const int count = static_cast<int>(file.get_int_or("scales", "count", 6));
    if (!(ratio > 0.0 && ratio < 1.0))
      throw ConfigError("config: scales.ratio must lie in (0,1)");
    double e = eps0;
    for (int i = 0; i < count; ++i) {
      cfg.ladder.eps.push_back(e);
      e *= ratio;
    }
  }
  if (cfg.ladder.eps.empty()) throw ConfigError("config: empty scale ladder");
  for (std::size_t i = 1; i < cfg.ladder.eps.size(); ++i)
    if (!(cfg.ladder.eps[i] < cfg.ladder.eps[i - 1]))
      throw ConfigError("config: scale ladder must be strictly decreasing in eps");
  cfg.ladder.eta_rule = file.get_or("scales", "eta_rule", "equal");
  if (cfg.ladder.eta_rule != "equal" && cfg.ladder.eta_rule != "regime")
    throw ConfigError("config: scales.eta_rule must be 'equal' or 'regime'");

  cfg.run.horizon = file.get_double_or("run", "T", 1.0);
  cfg.run.n = static_cast<int>(file.get_int_or("run", "n", 200));
  cfg.run.n_paths = static_cast<int>(file.get_int_or("run", "n_paths", 1000));
  cfg.run.p = file.get_double_or("run", "p", 2.0);
  cfg.run.seed = static_cast<std::uint64_t>(file.get_int_or("run", "seed", 12345));
  cfg.run.hurst = file.get_double_or("run", "hurst", 0.75);
  if (cfg.run.n < 1 || cfg.run.n_paths < 1 || cfg.run.horizon <= 0.0)
    throw ConfigError("config: run.T, run.n, run.n_paths must be positive");

  cfg.has_regime = file.has("regime", "lambda");
  cfg.lambda = file.get_double_or("regime", "lambda", 0.0);
  cfg.kappa = file.get_double_or("regime", "kappa", 0.0);

  cfg.out_dir = file.get_or("outputs", "dir", "out");
  cfg.format = file.get_or("outputs", "format", "csv");
  if (cfg.format != "csv" && cfg.format != "csv+svg")
    throw ConfigError("config: outputs.format must be csv or csv+svg");

  const std::string& t = file.text();
  cfg.config_hash = fnv1a_hash({t.data(), t.size()});
  return cfg;
}

}  // namespace msfbm::cli
