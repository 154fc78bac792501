// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "config.hpp"
#include "msfbm/io.hpp"

namespace msfbm::cli {

struct PipelineResult {
  bool check_pass = true;
  std::string summary;
};

PipelineResult run_simulate(const ExperimentConfig& cfg, OutputSink& sink);
PipelineResult run_average(const ExperimentConfig& cfg, OutputSink& sink);
PipelineResult run_poisson(const ExperimentConfig& cfg, OutputSink& sink);
PipelineResult run_rates(const ExperimentConfig& cfg, OutputSink& sink);
PipelineResult run_ergodic(const ExperimentConfig& cfg, OutputSink& sink);
PipelineResult run_fluctuations(const ExperimentConfig& cfg, OutputSink& sink);
PipelineResult run_extended(const ExperimentConfig& cfg, OutputSink& sink);

}  // namespace msfbm::cli
