// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msfbm/model.hpp"

namespace msfbm {

struct ExpMomentRow {
  double eta = 0.0;
  double estimate = 0.0;   // max over grid times of E exp(nu |Y_t|^beta)
  double stderr_ = 0.0;    // at the maximizing time
};

struct ExpMomentTable {
  std::vector<ExpMomentRow> rows;
  bool bounded = false;      // estimates agree across eta within noise
  double max_pair_z = 0.0;   // worst pairwise z-score
  double trend_z = 0.0;      // regression-on-log-eta slope z-score
};

// Estimates sup_{t<=T} E exp(nu |Y^eta_t|^beta) per eta and flags whether the
// values are bounded (no eta trend) within statistical noise.  Requires the
// moment-boundedness hypothesis nu * beta * sup|tau|^2 < 2 alpha.
// n_sub_boost multiplies the default fast substep count when the comparison
// target needs a finer-than-default chain.
ExpMomentTable exp_moment_diag(const ModelSpec& model,
                               std::span<const double> eta_list, double nu,
                               double beta, double horizon, int n,
                               int n_paths, std::uint64_t seed, int threads = 0,
                               int n_sub_boost = 1, double hurst = 0.75);

}  // namespace msfbm
