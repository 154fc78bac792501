// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "expr.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/io.hpp"
#include "msfbm/parallel.hpp"
#include "pipelines.hpp"

namespace {

using msfbm::cli::ExperimentConfig;
using msfbm::cli::PipelineResult;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitCheckFailed = 5;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int paths = 0;
  std::string format;
  bool check = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (INI)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "RNG seed override")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker threads (default: all cores)");
  cmd->add_option("--paths", opts.paths, "Monte Carlo path count override");
  cmd->add_option("--format", opts.format, "csv or csv+svg")
      ->check(CLI::IsMember({"csv", "csv+svg"}));
  cmd->add_flag("--check", opts.check,
                "exit 5 unless the pipeline's acceptance verdict passes");
}

ExperimentConfig resolve(const CommonOptions& opts, const std::string& command) {
  msfbm::cli::ConfigFile file =
      opts.config_path.empty() ? msfbm::cli::ConfigFile::parse_text("")
                               : msfbm::cli::ConfigFile::load(opts.config_path);
  if (opts.seed_set) file.set("run", "seed", std::to_string(opts.seed));
  if (opts.paths > 0) file.set("run", "n_paths", std::to_string(opts.paths));
  if (!opts.format.empty()) file.set("outputs", "format", opts.format);
  if (!opts.out_dir.empty()) file.set("outputs", "dir", opts.out_dir);
  if (!file.has("model", "name") && !file.has("model", "c"))
    file.set("model", "name", "ou-quadratic");
  ExperimentConfig cfg = ExperimentConfig::from_config(file);
  cfg.threads =
      opts.threads > 0 ? opts.threads : msfbm::default_thread_count();
  (void)command;
  return cfg;
}

int dispatch(const std::string& name,
             const std::function<PipelineResult(const ExperimentConfig&,
                                                msfbm::OutputSink&)>& fn,
             const CommonOptions& opts) {
  const ExperimentConfig cfg = resolve(opts, name);
  msfbm::OutputSink sink(cfg.out_dir);
  const PipelineResult result = fn(cfg, sink);
  sink.write_manifest(name, cfg.config_hash, cfg.run.seed);
  std::printf("%s: %s\n", name.c_str(), result.summary.c_str());
  if (opts.check && !result.check_pass) {
    std::printf("%s: acceptance verdict FAILED\n", name.c_str());
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slow-fast SDE simulation and limit-theorem verification"};
  app.require_subcommand(1);

  std::map<std::string,
           std::function<PipelineResult(const ExperimentConfig&, msfbm::OutputSink&)>>
      pipelines = {
          {"simulate", msfbm::cli::run_simulate},
          {"average", msfbm::cli::run_average},
          {"poisson", msfbm::cli::run_poisson},
          {"rates", msfbm::cli::run_rates},
          {"ergodic", msfbm::cli::run_ergodic},
          {"fluctuations", msfbm::cli::run_fluctuations},
          {"extended", msfbm::cli::run_extended},
      };
  const std::map<std::string, std::string> help = {
      {"simulate", "one trajectory of the coupled system, with noise dump"},
      {"average", "invariant measure, averaged drift, and the limit ODE"},
      {"poisson", "finite-difference corrector with Feynman-Kac cross-check"},
      {"rates", "strong-error ladder and log-log rate fit"},
      {"ergodic", "time-averaging error ladder and rate fit"},
      {"fluctuations", "rescaled-deviation ensembles vs the limiting mixed SDE"},
      {"extended", "singular-drift model: correctors, regimes, limit checks"},
  };

  std::map<std::string, CommonOptions> opts;
  for (auto& [name, fn] : pipelines) {
    CLI::App* cmd = app.add_subcommand(name, help.at(name));
    add_common(cmd, opts[name]);
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& [name, fn] : pipelines) {
    if (!app.get_subcommand(name)->parsed()) continue;
    try {
      return dispatch(name, fn, opts[name]);
    } catch (const msfbm::cli::ParseError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitConfig;
    } catch (const msfbm::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitConfig;
    } catch (const msfbm::PreconditionError& e) {
      std::fprintf(stderr, "precondition error: %s\n", e.what());
      return kExitPrecondition;
    } catch (const msfbm::NumericalError& e) {
      std::fprintf(stderr, "numerical failure: %s\n", e.what());
      return kExitNumerical;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitNumerical;
    }
  }
  return kExitOk;
}
