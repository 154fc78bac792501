// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "msfbm/averaging.hpp"
#include "msfbm/fbm.hpp"
#include "msfbm/measure.hpp"
#include "msfbm/model.hpp"

namespace msfbm {

// Rescaled deviations theta = (X^eps - Xbar)/sqrt(eps), with the optional
// I/II/III decomposition (drift linearization, averaging error, noise term).
struct FluctuationEnsemble {
  int n = 0;
  double horizon = 0.0;
  int dim = 1;
  double eps = 0.0;
  std::vector<std::vector<double>> theta;  // [path][(n+1)*dim]
  std::vector<std::vector<double>> comp_i, comp_ii, comp_iii;
  bool has_components = false;

  double theta_at(std::size_t path, int k, int comp = 0) const {
    return theta[path][static_cast<std::size_t>(k) * dim + comp];
  }
  // Marginal over paths at grid index k.
  std::vector<double> marginal(int k, int comp = 0) const;
};

FluctuationEnsemble theta_ensemble(const ModelSpec& model,
                                   const ScaleParams& scales,
                                   std::span<const double> xbar,  // (n+1)*dim
                                   const DriftFn& cbar,
                                   std::span<const double> x0,
                                   std::span<const double> y0, int n_paths,
                                   int n, double horizon, std::uint64_t seed,
                                   bool record_components = false,
                                   int threads = 0, double hurst = 0.75);

// Sigma_Phi(x) = (sum_i w_i (dPhi tau)(dPhi tau)^T)^{1/2}, the symmetric PSD
// root taken by eigendecomposition.  dphi(x, y, out) fills the dim_x x dim_y
// y-gradient of the corrector.
using SigmaFn = std::function<void(std::span<const double> x, std::span<double> out)>;

SigmaFn sigma_phi(const ModelSpec& model,
                  const std::function<void(std::span<const double> x,
                                           std::span<const double> y,
                                           std::span<double> out)>& dphi,
                  const InvariantMeasureEstimate& mu);

// Scalar shortcut (dim_x = dim_y = 1, x-independent corrector).
double sigma_phi_scalar(const ModelSpec& model, const PoissonSolution& corrector,
                        const InvariantMeasureEstimate& mu);

// Coefficients of the limiting mixed SDE
//   d theta = A(s) theta ds + extra(s) ds + lambda Sigma(s) dB + sigma_bar dW^H,
// tabulated along the slow grid.
struct LimitLawSpec {
  int dim = 1;
  double hurst = 0.75;
  double lambda = 0.0;
  std::vector<double> drift_jacobian;  // (n+1) * dim*dim
  std::vector<double> sigma_grid;      // (n+1) * dim*dim, PSD at every node
  std::vector<double> sigma_bar;       // dim*dim
  std::vector<double> extra_drift;     // (n+1) * dim, may be empty
};

// Builds the law of the base-model fluctuation limit along Xbar: A = grad
// cbar (numeric), Sigma = sigma_phi(Xbar_s), sigma_bar = int sigma dmu.
LimitLawSpec make_limit_law(const ModelSpec& model,
                            const InvariantMeasureEstimate& mu,
                            const DriftFn& cbar, std::span<const double> xbar,
                            int n, const SigmaFn& sigma, double lambda,
                            HurstParameter hurst);

// Euler scheme for the limiting SDE; the fBm term is exact per step (the
// coefficient is state independent).  Fresh, mutually independent driver
// streams per path.
FluctuationEnsemble simulate_limit_theta(const LimitLawSpec& law, int n_paths,
                                         int n, double horizon,
                                         std::uint64_t seed, int threads = 0);

struct ComparisonThresholds {
  double ks_alpha = 0.01;
  double moment_z_max = 4.0;
};

struct ComparisonRow {
  double time = 0.0;
  int coord = 0;
  double ks = 0.0;
  double ks_crit = 0.0;
  std::vector<double> moment_diff;  // orders 1..K
  std::vector<double> moment_z;
};

struct CovComparisonRow {
  double t1 = 0.0, t2 = 0.0;
  int coord = 0;
  double cov_a = 0.0, cov_b = 0.0, z = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<CovComparisonRow> cov_rows;
  bool pass = false;
};

// Fixed-time marginal comparison: per-coordinate two-sample KS and moment
// differences with pooled standard errors, plus covariance agreement across
// consecutive time pairs.
ComparisonReport compare_distributions(const FluctuationEnsemble& a,
                                       const FluctuationEnsemble& b,
                                       std::span<const double> times,
                                       int moments_up_to,
                                       const ComparisonThresholds& thresholds = {});

}  // namespace msfbm
