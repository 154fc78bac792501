// SPDX-License-Identifier: Apache-2.0
#include "msfbm/extended.hpp"

#include <cmath>

#include "msfbm/conditions.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/simulate.hpp"

namespace msfbm {

RegimeSpec::RegimeSpec(Regime r, double lambda_, double kappa_)
    : regime(r), lambda(lambda_), kappa(kappa_) {
  if (regime == Regime::Homogenization && lambda != 0.0)
    throw PreconditionError("RegimeSpec: homogenization regime requires lambda = 0");
  if (regime == Regime::Averaging && !(lambda > 0.0))
    throw PreconditionError("RegimeSpec: averaging regime requires lambda > 0");
}

ScaleParams scales_for_regime(const RegimeSpec& regime, double eps) {
  const double root = regime.lambda + regime.kappa * std::sqrt(eps);
  if (root < 0.0)
    throw PreconditionError(
        "scales_for_regime: lambda + kappa sqrt(eps) must be nonnegative");
  // lambda = 0, kappa = 0 leaves the ladder shape free up to
  // sqrt(eta)/sqrt(eps) = o(sqrt(eps)); eta = eps^3 realizes it.
  const double eta = (root > 0.0) ? root * root * eps : eps * eps * eps;
  return ScaleParams(eps, eta, regime.lambda, regime.kappa);
}

CenteringReport check_centering(const ModelSpec& model,
                                const InvariantMeasureEstimate& mu) {
  if (!model.has_b())
    throw PreconditionError("check_centering: model has no b coefficient");
  if (model.dim_x != 1)
    throw PreconditionError("check_centering: supported for dim_x = 1");
  std::vector<double> x0(model.dim_x, 0.0);
  const MeanStderr ms = mu.average_stderr([&](std::span<const double> y) {
    double out;
    model.b(x0, y, {&out, 1});
    return out;
  });
  CenteringReport rep;
  rep.value = ms.mean;
  rep.stderr_ = ms.stderr_;
  double scale = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double out;
    model.b(x0, mu.point(i), {&out, 1});
    scale = std::max(scale, std::abs(out));
  }
  const double mc_slack = mu.uniform_weights() ? 4.0 * rep.stderr_ : 0.0;
  rep.pass = std::abs(rep.value) <= std::max(mc_slack, 1e-9 * (1.0 + scale));
  return rep;
}

PoissonSolution solve_correction_psi(const ModelSpec& model,
                                     const RegimeSpec& regime,
                                     const InvariantMeasureEstimate& mu,
                                     double y_min, double y_max, int n_grid) {
  if (regime.regime != Regime::Homogenization)
    throw PreconditionError(
        "solve_correction_psi: the Psi corrector belongs to the homogenization regime");
  if (model.dim_y != 1 || model.dim_x != 1)
    throw PreconditionError("solve_correction_psi: FD path requires scalar slow "
                            "and fast variables; use solve_poisson_fk otherwise");
  const CenteringReport centering = check_centering(model, mu);
  if (!centering.pass)
    throw PreconditionError(
        "solve_correction_psi: centering condition fails, int b dmu = " +
        std::to_string(centering.value) + " +- " + std::to_string(centering.stderr_));

  auto drift = [&model, &regime](double y) {
    double f, g = 0.0;
    model.f({&y, 1}, {&f, 1});
    if (regime.lambda != 0.0 && model.has_g()) model.g({&y, 1}, {&g, 1});
    return f + regime.lambda * g;
  };
  auto tau2 = [&model](double y) {
    double t;
    model.tau({&y, 1}, {&t, 1});
    return t * t;
  };
  std::vector<double> x0(1, 0.0);
  auto rhs = [&model, &x0](double y) {
    double out;
    model.b(x0, {&y, 1}, {&out, 1});
    return out;
  };
  return solve_poisson_fd_1d(drift, tau2, rhs, mu, y_min, y_max, n_grid);
}

void effective_drift(const ModelSpec& model, const RegimeSpec& regime,
                     const PoissonSolution* psi, std::span<const double> x,
                     std::span<const double> y, std::span<double> out) {
  const int m = model.dim_x;
  model.c(x, y, out);
  if (regime.regime == Regime::Homogenization) {
    if (!model.has_g()) return;  // phi_1 = c when g vanishes
    if (psi == nullptr)
      throw PreconditionError("effective_drift: homogenization regime needs Psi");
    if (m != 1 || model.dim_y != 1)
      throw PreconditionError("effective_drift: corrector path requires scalars");
    double g;
    model.g(y, {&g, 1});
    out[0] += psi->dvalue_at(y[0]) * g;
    return;
  }
  // averaging regime: phi_2 = b/lambda + c
  if (regime.lambda == 0.0)
    throw PreconditionError("effective_drift: phi_2 undefined at lambda = 0");
  if (model.has_b()) {
    std::vector<double> bx(m);
    model.b(x, y, bx);
    for (int i = 0; i < m; ++i) out[i] += bx[i] / regime.lambda;
  }
}

std::function<void(std::span<const double>, std::span<double>)>
averaged_effective_drift(const ModelSpec& model, const RegimeSpec& regime,
                         const PoissonSolution* psi,
                         const InvariantMeasureEstimate& mu) {
  InvariantMeasureEstimate measure =
      (mu.dim() == 1 && mu.size() > 4096) ? mu.condense(512) : mu;
  ModelSpec m = model;
  RegimeSpec r = regime;
  PoissonSolution psi_copy;
  bool has_psi = psi != nullptr;
  if (has_psi) psi_copy = *psi;
  return [m, r, measure, psi_copy, has_psi](std::span<const double> x,
                                            std::span<double> out) {
    std::vector<double> buf(m.dim_x);
    for (int d = 0; d < m.dim_x; ++d) out[d] = 0.0;
    for (std::size_t i = 0; i < measure.size(); ++i) {
      effective_drift(m, r, has_psi ? &psi_copy : nullptr, x, measure.point(i),
                      buf);
      const double w = measure.weight(i);
      for (int d = 0; d < m.dim_x; ++d) out[d] += w * buf[d];
    }
  };
}

std::vector<double> limit_ode_extended(const ModelSpec& model,
                                       const RegimeSpec& regime,
                                       const InvariantMeasureEstimate& mu,
                                       const PoissonSolution* psi,
                                       std::span<const double> x0,
                                       double horizon, int n) {
  const DriftFn drift = averaged_effective_drift(model, regime, psi, mu);
  return solve_limit_ode(drift, x0, horizon, n);
}

FluctuationEnsemble limit_theta_extended(
    const ModelSpec& model, const RegimeSpec& regime,
    const InvariantMeasureEstimate& mu, std::span<const double> xbar,
    int n, double horizon, HurstParameter hurst, const PoissonSolution* psi,
    const std::function<PoissonSolution(std::span<const double> x)>* phi_star,
    int n_paths, std::uint64_t seed, int threads) {
  const int m = model.dim_x;
  if (m != 1 || model.dim_y != 1)
    throw PreconditionError("limit_theta_extended: requires scalar slow and fast variables");
  if (regime.regime == Regime::Homogenization && psi == nullptr)
    throw PreconditionError("limit_theta_extended: homogenization regime needs Psi");
  if (regime.kappa != 0.0 && phi_star == nullptr)
    throw PreconditionError("limit_theta_extended: kappa != 0 needs the Phi_* corrector");
  if (xbar.size() != static_cast<std::size_t>(n + 1) * m)
    throw PreconditionError("limit_theta_extended: Xbar grid mismatch");

  const DriftFn phibar = averaged_effective_drift(model, regime, psi, mu);

  LimitLawSpec law;
  law.dim = m;
  law.hurst = hurst.value();
  law.sigma_bar = average_y_coefficient(model.sigma, mu, m * m);
  law.drift_jacobian.resize(static_cast<std::size_t>(n + 1) * m * m);
  law.sigma_grid.resize(static_cast<std::size_t>(n + 1) * m * m);
  law.extra_drift.assign(static_cast<std::size_t>(n + 1) * m, 0.0);

  // In the homogenization regime the Brownian diffusion is Sigma_Psi with
  // unit coefficient; in the averaging regime it is lambda Sigma_{Phi_2}.
  law.lambda = (regime.regime == Regime::Homogenization) ? 1.0 : regime.lambda;

  std::vector<double> plus(1), minus(1);
  for (int k = 0; k <= n; ++k) {
    const double xk = xbar[k];
    const double step = 1e-5 * (1.0 + std::abs(xk));
    double xp = xk + step, xm = xk - step;
    phibar({&xp, 1}, plus);
    phibar({&xm, 1}, minus);
    law.drift_jacobian[k] = (plus[0] - minus[0]) / (2.0 * step);

    if (regime.regime == Regime::Homogenization) {
      law.sigma_grid[k] = sigma_phi_scalar(model, *psi, mu);
    } else {
      const PoissonSolution phi2 = (*phi_star)({&xk, 1});
      law.sigma_grid[k] = sigma_phi_scalar(model, phi2, mu);
    }

    double extra = 0.0;
    if (regime.kappa != 0.0) {
      const PoissonSolution phis = (*phi_star)({&xk, 1});
      const double avg_dphi_g = mu.average([&](std::span<const double> y) {
        double g = 0.0;
        if (model.has_g()) model.g(y, {&g, 1});
        return phis.dvalue_at(y[0]) * g;
      });
      extra += regime.kappa * avg_dphi_g;
      if (regime.regime == Regime::Averaging && model.has_b()) {
        const double bbar = mu.average([&](std::span<const double> y) {
          double b = 0.0;
          model.b({&xk, 1}, y, {&b, 1});
          return b;
        });
        extra -= regime.kappa / (regime.lambda * regime.lambda) * bbar;
      }
    }
    law.extra_drift[k] = extra;
  }

  return simulate_limit_theta(law, n_paths, n, horizon, seed, threads);
}

ConditionReport check_conditions_extended(const ModelSpec& model,
                                          const RegimeSpec& regime,
                                          std::span<const double> y_lo,
                                          std::span<const double> y_hi,
                                          int n_probe) {
  ConditionReport report;
  ConditionEntry e;
  e.name = "recurrence_extended";
  const double lo = std::max(0.0, regime.lambda - 0.1);
  const double hi = regime.lambda + 0.1;
  double worst = -1e300;
  std::vector<double> worst_pt;
  double worst_lambda = lo;

  // probed sup |tau|^2 over the box
  const int dy = model.dim_y;
  std::vector<double> ty(static_cast<std::size_t>(dy) * dy);
  double sup_tau_sq = 0.0;
  for (int i = 0; i < n_probe; ++i) {
    std::vector<double> py(dy);
    for (int d = 0; d < dy; ++d) {
      const double frac = std::fmod((i + 1) * 0.6180339887498949 + d * 0.37, 1.0);
      py[d] = y_lo[d] + frac * (y_hi[d] - y_lo[d]);
    }
    model.tau(py, ty);
    double fr = 0.0;
    for (double v : ty) fr += v * v;
    sup_tau_sq = std::max(sup_tau_sq, fr);
  }

  const int n_lambda = 9;
  for (int li = 0; li < n_lambda; ++li) {
    const double lam = lo + (hi - lo) * li / (n_lambda - 1);
    for (int i = 0; i < 4 * n_probe; ++i) {
      std::vector<double> py(dy);
      bool shell = false;
      for (int d = 0; d < dy; ++d) {
        const double frac = std::fmod((i + 1) * 0.7548776662466927 + d * 0.41, 1.0);
        py[d] = y_lo[d] + frac * (y_hi[d] - y_lo[d]);
        const double rel = frac;
        if (rel <= 0.1 || rel >= 0.9) shell = true;
      }
      if (!shell) continue;
      const double margin = recurrence_margin(model, py, sup_tau_sq, lam);
      if (margin > worst) {
        worst = margin;
        worst_pt = py;
        worst_lambda = lam;
      }
    }
  }
  e.margin = worst;
  e.pass = worst <= 0.0;
  e.witness = worst_pt;
  e.detail = "max margin over lambda in [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "] = " + std::to_string(worst) +
             " at lambda = " + std::to_string(worst_lambda);
  report.entries.push_back(std::move(e));
  report.all_pass = report.entries[0].pass;
  return report;
}

}  // namespace msfbm
