// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "msfbm/fbm.hpp"
#include "msfbm/model.hpp"

namespace msfbm {

// Hooks into the two-scale integrator.  `substep` fires before every fast
// update with the left-point state; `slow_step` fires after grid point k+1
// is recorded.  Either may be empty.
struct SimObserver {
  std::function<void(int k, int s, std::span<const double> x,
                     std::span<const double> y, double dt)>
      substep;
  std::function<void(int k, std::span<const double> x,
                     std::span<const double> y)>
      slow_step;
};

// Default fast substep count: about 50 substeps per fast relaxation time,
// capped at 10^6 per slow step.
int default_substeps(double slow_step, double eta);

// Substep count rounded up to a power of two so that scale ladders can share
// one fine Brownian path by block aggregation (common random numbers).
int pow2_substeps(double slow_step, double eta);

// Euler-Maruyama for the coupled system.  Per slow step the slow component
// advances with left-point coefficients and the slow-grid fBm increment;
// the fast component then runs noise.n_sub refined substeps.
SamplePath simulate_pair(const ModelSpec& model, const ScaleParams& scales,
                         std::span<const double> x0, std::span<const double> y0,
                         int n, double horizon, const NoiseBundle& noise,
                         const SimObserver* observer = nullptr);

struct RegimeSpec;  // extended.hpp

// Extended system with the (sqrt(eps/eta)) b slow drift and 1/sqrt(eps*eta)
// g fast drift.  With b and g absent this reduces bitwise to simulate_pair.
SamplePath simulate_extended(const ModelSpec& model, const ScaleParams& scales,
                             const RegimeSpec& regime,
                             std::span<const double> x0,
                             std::span<const double> y0, int n, double horizon,
                             const NoiseBundle& noise,
                             const SimObserver* observer = nullptr);

// dYt = f(Y) dt + tau(Y) dB on its own clock; the building block for
// invariant-measure estimation and Feynman-Kac corrector evaluation.
// `drift_shift` (optional) adds lambda*g for the limiting fast dynamics.
struct FastRescaledOptions {
  std::span<const double> y0;
  double lambda_g = 0.0;  // adds lambda_g * g(y) to the drift when g exists
};

void run_fast_rescaled(const ModelSpec& model, double horizon, double dt,
                       const FastRescaledOptions& opts, GaussianCursor& gauss,
                       const std::function<void(double t, std::span<const double> y)>& sink);

std::vector<double> simulate_fast_rescaled(const ModelSpec& model, double horizon,
                                           double dt, std::span<const double> y0,
                                           std::uint64_t seed,
                                           std::uint64_t path_index = 0);

inline constexpr double kOverflowGuard = 1e12;

}  // namespace msfbm
