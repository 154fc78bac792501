// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msfbm/rng.hpp"

namespace msfbm {

using CoefXY = std::function<void(std::span<const double> x,
                                  std::span<const double> y,
                                  std::span<double> out)>;
using CoefY = std::function<void(std::span<const double> y,
                                 std::span<double> out)>;

// Declared growth and recurrence constants.  The solver cannot certify them
// globally; check_conditions probes them numerically on a box.
struct GrowthMeta {
  double growth_k = 1.0;   // |c(x,y)| <= K (1+|x|^r)(1+|y|^q)
  double growth_q = 1.0;
  double growth_r = 0.0;   // must stay in [0,1)
  double alpha = 0.0;      // recurrence: y.f + alpha|y|^beta + ... <= 0
  double beta = 2.0;
  double gamma = 0.0;      // |grad_x c| <= gamma |y|^beta for large |y|
  bool bounded_grad_x_c = false;  // lifts the admissible-p restriction
  double sup_tau_sq = 1.0;        // declared sup |tau|^2 (Frobenius)
  double relax_time = 1.0;        // fast relaxation time scale
};

// Coefficients of the coupled slow-fast system.  sigma, f, tau depend on the
// fast variable only; b and g are the extended-model terms and may be absent.
struct ModelSpec {
  std::string name;
  int dim_x = 1;
  int dim_y = 1;
  CoefXY c;      // slow drift, out: dim_x
  CoefY sigma;   // slow diffusion, out: dim_x * dim_x row-major
  CoefY f;       // fast drift, out: dim_y
  CoefY tau;     // fast diffusion, out: dim_y * dim_y row-major
  CoefXY b;      // optional singular slow drift
  CoefY g;       // optional intermediate fast drift, out: dim_y
  GrowthMeta meta;

  bool has_b() const { return static_cast<bool>(b); }
  bool has_g() const { return static_cast<bool>(g); }
};

// Asymptotic knobs: noise size eps, scale separation eta, regime constants.
struct ScaleParams {
  double eps = 1.0;
  double eta = 1.0;
  double lambda = 0.0;  // limit of sqrt(eta)/sqrt(eps)
  double kappa = 0.0;   // rate constant for the extended fluctuations
  bool formal_zero_noise = false;

  ScaleParams(double eps_, double eta_, double lambda_ = 0.0, double kappa_ = 0.0);

  // eps = 0 run with the fBm term switched off (averaged-limit diagnostics).
  static ScaleParams formal_limit(double eta_);

  double noise_amplitude() const;  // sqrt(eps), 0 for formal runs
};

struct SamplePath {
  int n = 0;
  double horizon = 0.0;
  int dim_x = 1;
  int dim_y = 1;
  std::vector<double> x;  // (n+1) * dim_x, row k = state at t_k
  std::vector<double> y;  // (n+1) * dim_y
  // total drift added to x over step k (the substep-resolved integral);
  // x_{k+1} - x_k minus the noise term, bitwise
  std::vector<double> slow_drift_increment;  // n * dim_x
  SeedRecord seeds;

  double grid_step() const { return horizon / n; }
  std::span<const double> x_at(int k) const {
    return {x.data() + static_cast<std::size_t>(k) * dim_x,
            static_cast<std::size_t>(dim_x)};
  }
  std::span<const double> y_at(int k) const {
    return {y.data() + static_cast<std::size_t>(k) * dim_y,
            static_cast<std::size_t>(dim_y)};
  }
};

struct Ensemble {
  std::vector<SamplePath> paths;
};

// Built-in test models ("ou-quadratic", "ou-quadratic-sigma" and their
// extended variants).
ModelSpec make_registry_model(const std::string& name);
std::vector<std::string> registry_model_names();

}  // namespace msfbm
