// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <span>

#include "msfbm/averaging.hpp"
#include "msfbm/fluctuations.hpp"
#include "msfbm/measure.hpp"
#include "msfbm/model.hpp"

namespace msfbm {

enum class Regime { Homogenization, Averaging };

// Homogenization <=> lambda = 0; averaging <=> lambda > 0.  kappa is the
// rate constant of sqrt(eta)/sqrt(eps) - lambda, used only by the extended
// fluctuation limit.
struct RegimeSpec {
  Regime regime;
  double lambda;
  double kappa;

  RegimeSpec(Regime r, double lambda_, double kappa_ = 0.0);

  static RegimeSpec homogenization(double kappa_ = 0.0) {
    return RegimeSpec(Regime::Homogenization, 0.0, kappa_);
  }
  static RegimeSpec averaging(double lambda_, double kappa_ = 0.0) {
    return RegimeSpec(Regime::Averaging, lambda_, kappa_);
  }
};

// Scale ladder consistent with a regime: eta = (lambda + kappa sqrt(eps))^2 eps,
// so that sqrt(eta)/sqrt(eps) - lambda = kappa sqrt(eps) exactly at every rung.
ScaleParams scales_for_regime(const RegimeSpec& regime, double eps);

struct CenteringReport {
  double value = 0.0;
  double stderr_ = 0.0;
  bool pass = false;
};

// Verifies the centering condition int b dmu = 0 (homogenization regime).
CenteringReport check_centering(const ModelSpec& model,
                                const InvariantMeasureEstimate& mu);

// Corrector Psi solving (f + lambda g) Psi' + (tau^2/2) Psi'' = -b,
// centered under mu.  One-dimensional fast variable.
PoissonSolution solve_correction_psi(const ModelSpec& model,
                                     const RegimeSpec& regime,
                                     const InvariantMeasureEstimate& mu,
                                     double y_min, double y_max, int n_grid);

// Regime-dependent effective slow drift:
//   phi_1(x,y) = (Psi' g)(y) + c(x,y)        (homogenization)
//   phi_2(x,y) = (b/lambda + c)(x,y)         (averaging)
void effective_drift(const ModelSpec& model, const RegimeSpec& regime,
                     const PoissonSolution* psi, std::span<const double> x,
                     std::span<const double> y, std::span<double> out);

// Averaged effective drift as a callable over x.
std::function<void(std::span<const double>, std::span<double>)>
averaged_effective_drift(const ModelSpec& model, const RegimeSpec& regime,
                         const PoissonSolution* psi,
                         const InvariantMeasureEstimate& mu);

// RK4 solution of dXbar = phibar_regime(Xbar) dt.
std::vector<double> limit_ode_extended(const ModelSpec& model,
                                       const RegimeSpec& regime,
                                       const InvariantMeasureEstimate& mu,
                                       const PoissonSolution* psi,
                                       std::span<const double> x0,
                                       double horizon, int n);

// Ensemble of the regime-appropriate limiting fluctuation SDE.  psi is
// required in the homogenization regime; phi_star (corrector for the
// effective drift) is required whenever kappa != 0.
FluctuationEnsemble limit_theta_extended(
    const ModelSpec& model, const RegimeSpec& regime,
    const InvariantMeasureEstimate& mu, std::span<const double> xbar,
    int n, double horizon, HurstParameter hurst, const PoissonSolution* psi,
    const std::function<PoissonSolution(std::span<const double> x)>* phi_star,
    int n_paths, std::uint64_t seed, int threads = 0);

// Probes the extended recurrence condition over a lambda-neighborhood
// [max(0, lambda-0.1), lambda+0.1].
struct ConditionReport;
ConditionReport check_conditions_extended(const ModelSpec& model,
                                          const RegimeSpec& regime,
                                          std::span<const double> y_lo,
                                          std::span<const double> y_hi,
                                          int n_probe);

}  // namespace msfbm
