// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msfbm/measure.hpp"
#include "msfbm/model.hpp"

namespace msfbm {

// cbar(x) = int c(x,y) dmu(y) via the weighted sample.
std::vector<double> averaged_drift(const ModelSpec& model,
                                   const InvariantMeasureEstimate& mu,
                                   std::span<const double> x);

// Averaged y-only coefficient (sigma bar, g bar, ...), out_dim entries.
std::vector<double> average_y_coefficient(const CoefY& coef,
                                          const InvariantMeasureEstimate& mu,
                                          int out_dim);

using DriftFn = std::function<void(std::span<const double> x, std::span<double> out)>;

// Wraps averaged_drift as a reusable callable.
DriftFn make_averaged_drift_fn(const ModelSpec& model,
                               const InvariantMeasureEstimate& mu);

// Classical RK4 for dX = drift(X) dt; returns the (n+1) x dim trajectory,
// row-major on the uniform grid.
std::vector<double> solve_limit_ode(const DriftFn& drift, std::span<const double> x0,
                                    double horizon, int n);

// Grid corrector with value/derivative accessors and a centering certificate.
struct PoissonSolution {
  std::vector<double> grid;     // strictly increasing
  std::vector<double> values;   // Phi on grid
  std::vector<double> dvalues;  // dPhi/dy on grid
  double centering_residual = 0.0;
  std::vector<double> x_slice;  // empty means x-independent

  double value_at(double y) const;
  double dvalue_at(double y) const;
  double sup_abs() const;
};

inline constexpr double kCenteringTol = 1e-6;

// Second-order finite-difference solve of
//   drift(y) Phi' + (tau^2(y)/2) Phi'' = -rhs(y)
// on [y_min, y_max] (one-dimensional fast variable), reflecting boundaries
// placed on an internally padded grid, solution centered under mu.
// The rhs must be centered under mu.
PoissonSolution solve_poisson_fd_1d(
    const std::function<double(double)>& drift,
    const std::function<double(double)>& tau_sq,
    const std::function<double(double)>& rhs,
    const InvariantMeasureEstimate& mu, double y_min, double y_max, int n_grid);

// Convenience wrapper using the model's fast coefficients.
PoissonSolution solve_poisson_fd(const ModelSpec& model,
                                 const std::function<double(double)>& rhs,
                                 const InvariantMeasureEstimate& mu,
                                 double y_min, double y_max, int n_grid);

struct FkEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double tail_bound = 0.0;
};

// Monte Carlo corrector value Phi(y) = int_0^Tmax E[rhs(Y_t^y)] dt, valid in
// any fast dimension.  The neglected tail beyond Tmax is estimated from the
// terminal integrand level and reported, not dropped silently.
FkEstimate solve_poisson_fk(const ModelSpec& model,
                            const std::function<double(std::span<const double>)>& rhs,
                            std::span<const double> y, double t_max, int n_paths,
                            std::uint64_t seed, double lambda_g = 0.0);

struct ErrorRow {
  double eps = 0.0;
  double eta = 0.0;
  double p = 2.0;
  double error = 0.0;   // E sup_t |.|^p estimate
  double stderr_ = 0.0;
};

// E sup_{t<=T} |X^eps - Xbar|^p per scale pair, with the driving noise
// generated once per path on the finest fast grid and shared across the
// ladder (common random numbers).
std::vector<ErrorRow> strong_error_table(
    const ModelSpec& model, const DriftFn& cbar,
    std::span<const std::pair<double, double>> scale_list, double p,
    int n_paths, int n, double horizon, std::span<const double> x0,
    std::span<const double> y0, std::uint64_t seed, int threads = 0,
    double hurst = 0.75);

// E sup_{t<=T} | int_0^t (h(X,Y) - hbar(X)) ds |^p per eta (eps = eta), with
// the time integral accumulated on the fast subgrid.
std::vector<ErrorRow> ergodic_error_table(
    const ModelSpec& model,
    const std::function<double(std::span<const double>, std::span<const double>)>& h,
    const std::function<double(std::span<const double>)>& hbar,
    std::span<const double> eta_list, double p, int n_paths, int n,
    double horizon, std::span<const double> x0, std::span<const double> y0,
    std::uint64_t seed, int threads = 0, double hurst = 0.75);

}  // namespace msfbm
