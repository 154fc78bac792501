// SPDX-License-Identifier: Apache-2.0
//
// End-to-end verification suite.  Each case prints one PASS/FAIL line with
// the measured quantities so a run reads as a report.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "msfbm/averaging.hpp"
#include "msfbm/diagnostics.hpp"
#include "msfbm/extended.hpp"
#include "msfbm/fbm.hpp"
#include "msfbm/fluctuations.hpp"
#include "msfbm/ito.hpp"
#include "msfbm/measure.hpp"
#include "msfbm/parallel.hpp"
#include "msfbm/simulate.hpp"
#include "msfbm/stats.hpp"

using namespace msfbm;

namespace {

void report(const char* tag, bool pass, const std::string& detail) {
  std::printf("[acceptance] %-24s %s  %s\n", tag, pass ? "PASS" : "FAIL",
              detail.c_str());
  CHECK_MESSAGE(pass, tag << ": " << detail);
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return std::string(buf);
}

}  // namespace

TEST_CASE("A1 fbm exactness") {
  const int n = 32;
  const double horizon = 1.0;
  const int n_paths = 200000;
  double worst_z = 0.0;
  for (double hv : {0.6, 0.75, 0.9}) {
    HurstParameter h(hv);
    FbmSampler sampler(n, horizon, h);
    std::vector<double> cross((n + 1) * (n + 1), 0.0);
    std::vector<double> inc(n), v(n + 1, 0.0);
    for (int p = 0; p < n_paths; ++p) {
      GaussianCursor g(GaussianStream(101, make_stream_id(p, stream_role::kFbmComponent)));
      sampler.sample_increments(g, inc);
      for (int i = 0; i < n; ++i) v[i + 1] = v[i] + inc[i];
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= i; ++j) cross[i * (n + 1) + j] += v[i] * v[j];
    }
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= i; ++j) {
        const double ti = horizon * i / n, tj = horizon * j / n;
        const double exact = covariance_rh(ti, tj, h);
        const double emp = cross[i * (n + 1) + j] / n_paths;
        const double se = std::sqrt(
            (covariance_rh(ti, ti, h) * covariance_rh(tj, tj, h) + exact * exact) /
            n_paths);
        worst_z = std::max(worst_z, std::abs(emp - exact) / se);
      }
  }
  report("A1 fbm-exactness", worst_z < 4.0,
         fmt("worst |z| over 3x561 covariance entries = %.2f (< 4)", worst_z));
}

TEST_CASE("A2 self-similarity") {
  HurstParameter h(0.75);
  const double a = 4.0;
  const int n = 64, n_paths = 100000;
  FbmSampler long_run(n, a * 1.0, h);
  FbmSampler short_run(n, 1.0, h);
  std::vector<double> scaled(n_paths), reference(n_paths), inc(n);
  const double factor = std::pow(a, -h.value());
  for (int p = 0; p < n_paths; ++p) {
    GaussianCursor g1(GaussianStream(202, make_stream_id(p, stream_role::kFbmComponent)));
    long_run.sample_increments(g1, inc);
    double s = 0.0;
    for (double d : inc) s += d;
    scaled[p] = factor * s;
    GaussianCursor g2(GaussianStream(303, make_stream_id(p, stream_role::kFbmComponent)));
    short_run.sample_increments(g2, inc);
    s = 0.0;
    for (double d : inc) s += d;
    reference[p] = s;
  }
  const double ks = ks_statistic(scaled, reference);
  const double crit = ks_critical_value(0.01, n_paths, n_paths);
  report("A2 self-similarity", ks < crit,
         fmt("KS(a^-H W_aT, W_T) = %.5f vs 1%% critical %.5f", ks, crit));
}

TEST_CASE("A3 centered noise term") {
  const ModelSpec m = make_registry_model("ou-quadratic-sigma");
  const int n = 128, n_paths = 10000;
  const double horizon = 1.0;
  const ScaleParams scales(0.01, 0.01);
  const int n_sub = default_substeps(horizon / n, scales.eta);
  FbmSampler sampler(n, horizon, HurstParameter(0.75));
  std::vector<double> sums(n_paths);
  parallel_for(n_paths, 0, [&](std::size_t p) {
    const NoiseBundle noise =
        make_noise_bundle(sampler, 1, 1, n, horizon, n_sub, 404, p);
    std::vector<double> x0{1.0}, y0{0.0};
    const SamplePath path = simulate_pair(m, scales, x0, y0, n, horizon, noise);
    double acc = 0.0;
    std::vector<double> sig(1);
    for (int k = 0; k < n; ++k) {
      m.sigma(path.y_at(k), sig);
      acc += sig[0] * noise.fbm_increment(0, k);
    }
    sums[p] = acc;
  });
  const MeanStderr ms = mean_stderr(sums);
  report("A3 centered-noise", std::abs(ms.mean) < 4.0 * ms.stderr_,
         fmt("|mean| = %.5f vs 4 SE = %.5f (10^4 paths)", std::abs(ms.mean),
             4.0 * ms.stderr_));
}

TEST_CASE("A4 averaging rate") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu =
      estimate_invariant_measure(m, 50.0, 1000000, 10, 505);
  const DriftFn cbar = make_averaged_drift_fn(m, mu);
  std::vector<std::pair<double, double>> scales;
  for (int k = 4; k <= 9; ++k)
    scales.emplace_back(std::pow(2.0, -k), std::pow(2.0, -k));
  std::vector<double> x0{1.0}, y0{0.0};
  const auto rows =
      strong_error_table(m, cbar, scales, 2.0, 2000, 800, 1.0, x0, y0, 606, 0);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(std::sqrt(r.eps) + std::sqrt(r.eta));
    ys.push_back(std::sqrt(r.error));
  }
  const SlopeFit fit = fit_slope(xs, ys);
  report("A4 averaging-rate", fit.slope >= 0.8 && fit.slope <= 1.2,
         fmt("slope = %.3f (r2 = %.4f, CI +-%.3f), window [0.8, 1.2]", fit.slope,
             fit.r2, fit.ci_half_width));
}

TEST_CASE("A5 ergodic rate") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu =
      estimate_invariant_measure(m, 50.0, 1000000, 10, 707);
  auto h_fn = [](std::span<const double>, std::span<const double> y) {
    return y[0] * y[0];
  };
  const double hbar_val = mu.moment(0, 2);
  auto hbar = [hbar_val](std::span<const double>) { return hbar_val; };
  std::vector<double> etas;
  for (int k = 4; k <= 9; ++k) etas.push_back(std::pow(2.0, -k));
  std::vector<double> x0{1.0}, y0{0.0};
  const auto rows =
      ergodic_error_table(m, h_fn, hbar, etas, 2.0, 2000, 200, 1.0, x0, y0, 808, 0);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(std::sqrt(r.eta));
    ys.push_back(std::sqrt(r.error));
  }
  const SlopeFit fit = fit_slope(xs, ys);
  report("A5 ergodic-rate", fit.slope >= 0.8 && fit.slope <= 1.2,
         fmt("slope = %.3f (r2 = %.4f, CI +-%.3f), window [0.8, 1.2]", fit.slope,
             fit.r2, fit.ci_half_width));
}

TEST_CASE("A6 corrector oracle") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 64);
  const PoissonSolution sol =
      solve_poisson_fd(m, [](double y) { return y * y - 0.5; }, mu, -5.0, 5.0, 4001);
  double sup = 0.0;
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    const double y = sol.grid[i];
    sup = std::max(sup, std::abs(sol.values[i] - (0.5 * y * y - 0.25)));
  }
  const double sig = sigma_phi_scalar(m, sol, mu);
  const bool pass = sup < 1e-3 && std::abs(sig - std::sqrt(0.5)) < 1e-3;
  report("A6 corrector-oracle", pass,
         fmt("sup|Phi - (y^2/2 - 1/4)| = %.2e (< 1e-3), Sigma_Phi = %.6f vs %.6f",
             sup, sig, std::sqrt(0.5)));
}

TEST_CASE("A7 fluctuation limit") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  HurstParameter h(0.75);
  const int n = 256, n_paths = 10000;
  const double horizon = 1.0;
  const InvariantMeasureEstimate mu =
      estimate_invariant_measure(m, 50.0, 2000000, 10, 909);
  const DriftFn cbar = make_averaged_drift_fn(m, mu);
  std::vector<double> x0{1.0}, y0{0.0};
  const std::vector<double> xbar = solve_limit_ode(cbar, x0, horizon, n);

  const double m2 = mu.moment(0, 2);
  const PoissonSolution corrector = solve_poisson_fd(
      m, [m2](double y) { return y * y - m2; }, mu, -6.0, 6.0, 2001);
  auto dphi = [&corrector](std::span<const double>, std::span<const double> y,
                           std::span<double> o) { o[0] = corrector.dvalue_at(y[0]); };
  const SigmaFn sigma = sigma_phi(m, dphi, mu);
  const LimitLawSpec law = make_limit_law(m, mu, cbar, xbar, n, sigma, 1.0, h);
  const FluctuationEnsemble limit =
      simulate_limit_theta(law, n_paths, n, horizon, 111213, 0);
  const std::vector<double> limit_terminal = limit.marginal(n);

  // deterministic quadrature for the limit variance
  const int ng = 4096;
  std::vector<double> flow(ng + 1);
  for (int i = 0; i <= ng; ++i)
    flow[i] = std::exp(-(horizon - horizon * i / ng));
  const double quad_var = 0.5 * (1.0 - std::exp(-2.0 * horizon)) / 2.0 +
                          h_inner_product(flow, flow, horizon, h);
  const double limit_var = sample_variance(limit_terminal);
  const double limit_var_se = variance_stderr(limit_terminal);
  const bool quad_ok = std::abs(limit_var - quad_var) < 4.0 * limit_var_se;
  report("A7a limit-vs-quadrature", quad_ok,
         fmt("limit MC var = %.4f vs quadrature %.4f (4 SE = %.4f)", limit_var,
             quad_var, 4.0 * limit_var_se));

  std::vector<double> times{horizon / 2.0, horizon};
  std::vector<double> ks_first(times.size(), -1.0), ks_last(times.size(), -1.0);
  bool var_ok = false;
  std::string var_detail;
  for (int k : {5, 7, 9}) {
    const double eps = std::pow(2.0, -k);
    const ScaleParams scales(eps, eps);
    const FluctuationEnsemble ens = theta_ensemble(
        m, scales, xbar, cbar, x0, y0, n_paths, n, horizon, 141516, false, 0);
    const ComparisonReport rep = compare_distributions(ens, limit, times, 2);
    for (std::size_t ti = 0; ti < rep.rows.size(); ++ti) {
      if (ks_first[ti] < 0.0) ks_first[ti] = rep.rows[ti].ks;
      ks_last[ti] = rep.rows[ti].ks;
    }
    if (k == 9) {
      const std::vector<double> terminal = ens.marginal(n);
      const double v = sample_variance(terminal);
      const double se = variance_stderr(terminal);
      const double pooled = std::sqrt(se * se + limit_var_se * limit_var_se);
      var_ok = std::abs(v - limit_var) < 4.0 * pooled;
      var_detail = fmt("Var(theta^eps_T) = %.4f vs limit %.4f (4 pooled SE = %.4f)",
                       v, limit_var, 4.0 * pooled);
    }
  }
  report("A7b variance-agreement", var_ok, var_detail);
  bool trend = true;
  for (std::size_t ti = 0; ti < times.size(); ++ti) trend &= ks_last[ti] < ks_first[ti];
  report("A7c ks-trend", trend,
         fmt("KS t=0.5: %.4f -> %.4f; t=1: %.4f -> %.4f (coarsest -> finest)",
             ks_first[0], ks_last[0], ks_first[1], ks_last[1]));
}

TEST_CASE("A8 decomposition identity") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 64);
  const DriftFn cbar = make_averaged_drift_fn(m, mu);
  const int n = 128;
  std::vector<double> x0{1.0}, y0{0.0};
  const std::vector<double> xbar = solve_limit_ode(cbar, x0, 1.0, n);
  const ScaleParams scales(1.0 / 64.0, 1.0 / 64.0);
  const FluctuationEnsemble ens =
      theta_ensemble(m, scales, xbar, cbar, x0, y0, 500, n, 1.0, 171819, true, 0);
  double max_theta = 0.0, max_resid = 0.0;
  for (std::size_t p = 0; p < ens.theta.size(); ++p)
    for (int k = 0; k <= n; ++k) {
      max_theta = std::max(max_theta, std::abs(ens.theta[p][k]));
      const double resid =
          ens.theta[p][k] -
          (ens.comp_i[p][k] + ens.comp_ii[p][k] + ens.comp_iii[p][k]);
      max_resid = std::max(max_resid, std::abs(resid));
    }
  const double tol = 1e-10 * (1.0 + max_theta);
  report("A8 decomposition", max_resid <= tol,
         fmt("max |theta - (I+II+III)| = %.2e vs tolerance %.2e", max_resid, tol));
}

TEST_CASE("A9 extended reduction") {
  // bitwise reduction to the base model on shared noise
  const ModelSpec base = make_registry_model("ou-quadratic");
  const int n = 64;
  const double horizon = 1.0;
  const ScaleParams scales(0.05, 0.0125);
  const RegimeSpec regime = RegimeSpec::averaging(0.5);
  const int n_sub = default_substeps(horizon / n, scales.eta);
  FbmSampler sampler(n, horizon, HurstParameter(0.75));
  bool bitwise = true;
  for (std::uint64_t p = 0; p < 3; ++p) {
    const NoiseBundle noise =
        make_noise_bundle(sampler, 1, 1, n, horizon, n_sub, 202122, p);
    std::vector<double> x0{1.0}, y0{0.2};
    const SamplePath a = simulate_pair(base, scales, x0, y0, n, horizon, noise);
    const SamplePath b =
        simulate_extended(base, scales, regime, x0, y0, n, horizon, noise);
    bitwise &= a.x == b.x && a.y == b.y;
  }
  report("A9a bitwise-reduction", bitwise,
         "simulate_extended(b,g absent) == simulate_pair on 3 shared-noise paths");

  // regime-1 correction machinery on the extension
  const ModelSpec ext = make_registry_model("ou-quadratic-ext");
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 64);
  const RegimeSpec r1 = RegimeSpec::homogenization();
  const PoissonSolution psi = solve_correction_psi(ext, r1, mu, -6.0, 6.0, 2001);
  const double sigma_psi = sigma_phi_scalar(ext, psi, mu);
  report("A9b sigma-psi", std::abs(sigma_psi - 1.0) < 1e-3,
         fmt("Sigma_Psi = %.6f vs 1 (tol 1e-3)", sigma_psi));

  const int n_ode = 1000;  // h = 1e-3
  std::vector<double> x0{1.0};
  const std::vector<double> xbar =
      limit_ode_extended(ext, r1, mu, &psi, x0, 1.0, n_ode);
  double sup = 0.0;
  for (int k = 0; k <= n_ode; ++k) {
    const double t = static_cast<double>(k) / n_ode;
    sup = std::max(sup, std::abs(xbar[k] - (0.5 + 0.5 * std::exp(-t))));
  }
  report("A9c extended-limit-ode", sup < 1e-6,
         fmt("sup |Xbar_1 - (1/2 + 1/2 e^-t)| = %.2e at h = 1e-3 (tol 1e-6)", sup));
}

TEST_CASE("A10 exponential moments") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  std::vector<double> etas{1e-1, 1e-2, 1e-3};
  const ExpMomentTable tab =
      exp_moment_diag(m, etas, 0.3, 2.0, 1.0, 8, 4000, 232425, 0, 4);
  const double closed = 1.0 / std::sqrt(1.0 - 2.0 * 0.3 * 0.5);
  bool each_ok = true;
  std::string detail;
  for (const auto& r : tab.rows) {
    const double z = (r.estimate - closed) / r.stderr_;
    each_ok &= std::abs(z) < 3.0;
    detail += fmt("eta=%g: %.4f (z=%+.2f) ", r.eta, r.estimate, z);
  }
  report("A10a closed-form", each_ok, detail + fmt("vs %.4f", closed));
  report("A10b no-trend", tab.bounded,
         fmt("max pair z = %.2f, trend z = %.2f (< 3)", tab.max_pair_z,
             tab.trend_z));
}

TEST_CASE("A11 ito residual refinement") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  TestFunction f;
  f.value = [](std::span<const double> x, std::span<const double>) {
    return x[0] * x[0];
  };
  f.grad_x = [](std::span<const double> x, std::span<const double>,
                std::span<double> o) { o[0] = 2.0 * x[0]; };
  f.grad_y = [](std::span<const double>, std::span<const double>,
                std::span<double> o) { o[0] = 0.0; };
  f.hess_x = [](std::span<const double>, std::span<const double>,
                std::span<double> o) { o[0] = 2.0; };
  f.hess_y = [](std::span<const double>, std::span<const double>,
                std::span<double> o) { o[0] = 0.0; };
  const ScaleParams scales(0.25, 0.01);
  std::vector<double> x0{1.0}, y0{0.0};
  const int n_paths = 100;
  std::vector<double> means;
  for (int n : {64, 128, 256}) {
    FbmSampler sampler(n, 1.0, HurstParameter(0.75));
    std::vector<double> residuals(n_paths);
    parallel_for(n_paths, 0, [&](std::size_t p) {
      const NoiseBundle noise =
          make_noise_bundle(sampler, 1, 1, n, 1.0,
                            default_substeps(1.0 / n, scales.eta), 262728, p);
      residuals[p] = ito_residual(m, f, scales, x0, y0, n, 1.0, noise);
    });
    means.push_back(mean_stderr(residuals).mean);
  }
  const double r1 = means[0] / means[1];
  const double r2 = means[1] / means[2];
  report("A11 ito-refinement", r1 >= 1.5 && r2 >= 1.5,
         fmt("mean residual %.2e -> %.2e -> %.2e (ratios %.2f, %.2f >= 1.5)",
             means[0], means[1], means[2], r1, r2));
}
