// SPDX-License-Identifier: Apache-2.0
#include "msfbm/fluctuations.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "msfbm/errors.hpp"
#include "msfbm/parallel.hpp"
#include "msfbm/simulate.hpp"

namespace msfbm {

std::vector<double> FluctuationEnsemble::marginal(int k, int comp) const {
  std::vector<double> out(theta.size());
  for (std::size_t p = 0; p < theta.size(); ++p)
    out[p] = theta[p][static_cast<std::size_t>(k) * dim + comp];
  return out;
}

FluctuationEnsemble theta_ensemble(const ModelSpec& model,
                                   const ScaleParams& scales,
                                   std::span<const double> xbar,
                                   const DriftFn& cbar,
                                   std::span<const double> x0,
                                   std::span<const double> y0, int n_paths,
                                   int n, double horizon, std::uint64_t seed,
                                   bool record_components, int threads,
                                   double hurst) {
  const int m = model.dim_x;
  const int dy = model.dim_y;
  if (xbar.size() != static_cast<std::size_t>(n + 1) * m)
    throw PreconditionError("theta_ensemble: Xbar missing or on the wrong grid");
  for (int i = 0; i < m; ++i)
    if (xbar[i] != x0[i])
      throw PreconditionError("theta_ensemble: Xbar does not start at x0");

  if (!(scales.eps > 0.0))
    throw PreconditionError("theta_ensemble: deviations need eps > 0");
  const double h = horizon / n;
  const double sqrt_eps = std::sqrt(scales.eps);
  const int n_sub = default_substeps(h, scales.eta);
  FbmSampler sampler(n, horizon, HurstParameter(hurst));

  FluctuationEnsemble ens;
  ens.n = n;
  ens.horizon = horizon;
  ens.dim = m;
  ens.eps = scales.eps;
  ens.has_components = record_components;
  ens.theta.resize(n_paths);
  if (record_components) {
    ens.comp_i.resize(n_paths);
    ens.comp_ii.resize(n_paths);
    ens.comp_iii.resize(n_paths);
  }

  parallel_for(n_paths, threads, [&](std::size_t path) {
    const NoiseBundle noise =
        make_noise_bundle(sampler, m, dy, n, horizon, n_sub, seed, path);
    const SamplePath traj =
        simulate_pair(model, scales, x0, y0, n, horizon, noise);

    std::vector<double> theta(static_cast<std::size_t>(n + 1) * m);
    for (int k = 0; k <= n; ++k)
      for (int i = 0; i < m; ++i)
        theta[static_cast<std::size_t>(k) * m + i] =
            (traj.x[static_cast<std::size_t>(k) * m + i] -
             xbar[static_cast<std::size_t>(k) * m + i]) /
            sqrt_eps;

    if (record_components) {
      // I tracks cbar along X^eps against the limit ODE's own increments, so
      // I + II + III telescopes to theta exactly in floating point.
      std::vector<double> ci(static_cast<std::size_t>(n + 1) * m, 0.0);
      std::vector<double> cii(ci), ciii(ci);
      std::vector<double> cbar_x(m), sig(static_cast<std::size_t>(m) * m);
      for (int k = 0; k < n; ++k) {
        const auto xk = traj.x_at(k);
        const auto yk = traj.y_at(k);
        cbar(xk, cbar_x);
        model.sigma(yk, sig);
        for (int i = 0; i < m; ++i) {
          const double dbar = xbar[static_cast<std::size_t>(k + 1) * m + i] -
                              xbar[static_cast<std::size_t>(k) * m + i];
          const double drift_inc =
              traj.slow_drift_increment[static_cast<std::size_t>(k) * m + i];
          ci[static_cast<std::size_t>(k + 1) * m + i] =
              ci[static_cast<std::size_t>(k) * m + i] +
              (cbar_x[i] * h - dbar) / sqrt_eps;
          cii[static_cast<std::size_t>(k + 1) * m + i] =
              cii[static_cast<std::size_t>(k) * m + i] +
              (drift_inc - cbar_x[i] * h) / sqrt_eps;
          double noise_inc = 0.0;
          for (int j = 0; j < m; ++j)
            noise_inc += sig[static_cast<std::size_t>(i) * m + j] *
                         noise.fbm_increment(j, k);
          ciii[static_cast<std::size_t>(k + 1) * m + i] =
              ciii[static_cast<std::size_t>(k) * m + i] + noise_inc;
        }
      }
      ens.comp_i[path] = std::move(ci);
      ens.comp_ii[path] = std::move(cii);
      ens.comp_iii[path] = std::move(ciii);
    }
    ens.theta[path] = std::move(theta);
  });
  return ens;
}

SigmaFn sigma_phi(const ModelSpec& model,
                  const std::function<void(std::span<const double>,
                                           std::span<const double>,
                                           std::span<double>)>& dphi,
                  const InvariantMeasureEstimate& mu) {
  const int m = model.dim_x;
  const int dy = model.dim_y;
  ModelSpec mod = model;
  // large Monte Carlo samples condense to a histogram; quadrature measures
  // pass through exactly
  InvariantMeasureEstimate measure =
      (mu.dim() == 1 && mu.size() > 4096) ? mu.condense(512) : mu;
  auto dphi_fn = dphi;
  return [mod, measure, dphi_fn, m, dy](std::span<const double> x,
                                        std::span<double> out) {
    std::vector<double> dp(static_cast<std::size_t>(m) * dy);
    std::vector<double> ty(static_cast<std::size_t>(dy) * dy);
    std::vector<double> a(static_cast<std::size_t>(m) * dy);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < measure.size(); ++i) {
      const auto y = measure.point(i);
      dphi_fn(x, y, dp);
      mod.tau(y, ty);
      // a = dphi * tau  (m x dy)
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < dy; ++c) {
          double s = 0.0;
          for (int q = 0; q < dy; ++q)
            s += dp[static_cast<std::size_t>(r) * dy + q] *
                 ty[static_cast<std::size_t>(q) * dy + c];
          a[static_cast<std::size_t>(r) * dy + c] = s;
        }
      const double w = measure.weight(i);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
          double s = 0.0;
          for (int q = 0; q < dy; ++q)
            s += a[static_cast<std::size_t>(r) * dy + q] *
                 a[static_cast<std::size_t>(c) * dy + q];
          acc(r, c) += w * s;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acc);
    const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < m; ++i) {
      if (lam(i) < -1e-10 * std::max(1.0, max_eig))
        throw NumericalError(
            "sigma_phi: averaged outer product has a negative eigenvalue " +
            std::to_string(lam(i)));
      lam(i) = std::sqrt(std::max(0.0, lam(i)));
    }
    Eigen::MatrixXd root =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        out[static_cast<std::size_t>(r) * m + c] = root(r, c);
  };
}

double sigma_phi_scalar(const ModelSpec& model, const PoissonSolution& corrector,
                        const InvariantMeasureEstimate& mu) {
  if (model.dim_x != 1 || model.dim_y != 1)
    throw PreconditionError("sigma_phi_scalar: requires dim_x = dim_y = 1");
  auto dphi = [&corrector](std::span<const double>, std::span<const double> y,
                           std::span<double> out) {
    out[0] = corrector.dvalue_at(y[0]);
  };
  const SigmaFn fn = sigma_phi(model, dphi, mu);
  double x = 0.0, out = 0.0;
  fn({&x, 1}, {&out, 1});
  return out;
}

LimitLawSpec make_limit_law(const ModelSpec& model,
                            const InvariantMeasureEstimate& mu,
                            const DriftFn& cbar, std::span<const double> xbar,
                            int n, const SigmaFn& sigma, double lambda,
                            HurstParameter hurst) {
  const int m = model.dim_x;
  LimitLawSpec law;
  law.dim = m;
  law.hurst = hurst.value();
  law.lambda = lambda;
  law.sigma_bar = average_y_coefficient(
      model.sigma, mu, m * m);
  law.drift_jacobian.resize(static_cast<std::size_t>(n + 1) * m * m);
  law.sigma_grid.resize(static_cast<std::size_t>(n + 1) * m * m);

  std::vector<double> plus(m), minus(m), xp(m), xm(m);
  for (int k = 0; k <= n; ++k) {
    const double* xk = xbar.data() + static_cast<std::size_t>(k) * m;
    // centered numeric Jacobian of cbar
    for (int j = 0; j < m; ++j) {
      const double step = 1e-5 * (1.0 + std::abs(xk[j]));
      std::copy(xk, xk + m, xp.begin());
      std::copy(xk, xk + m, xm.begin());
      xp[j] += step;
      xm[j] -= step;
      cbar(xp, plus);
      cbar(xm, minus);
      for (int i = 0; i < m; ++i)
        law.drift_jacobian[(static_cast<std::size_t>(k) * m + i) * m + j] =
            (plus[i] - minus[i]) / (2.0 * step);
    }
    sigma({xk, static_cast<std::size_t>(m)},
          {law.sigma_grid.data() + static_cast<std::size_t>(k) * m * m,
           static_cast<std::size_t>(m) * m});
  }
  return law;
}

FluctuationEnsemble simulate_limit_theta(const LimitLawSpec& law, int n_paths,
                                         int n, double horizon,
                                         std::uint64_t seed, int threads) {
  const int m = law.dim;
  if (law.drift_jacobian.size() != static_cast<std::size_t>(n + 1) * m * m ||
      law.sigma_grid.size() != static_cast<std::size_t>(n + 1) * m * m)
    throw PreconditionError("simulate_limit_theta: law grids do not match n");
  const bool has_extra = !law.extra_drift.empty();
  if (has_extra &&
      law.extra_drift.size() != static_cast<std::size_t>(n + 1) * m)
    throw PreconditionError("simulate_limit_theta: extra drift grid mismatch");

  const double h = horizon / n;
  const double sqrt_h = std::sqrt(h);
  FbmSampler sampler(n, horizon, HurstParameter(law.hurst));

  FluctuationEnsemble ens;
  ens.n = n;
  ens.horizon = horizon;
  ens.dim = m;
  ens.eps = 0.0;
  ens.theta.resize(n_paths);

  parallel_for(n_paths, threads, [&](std::size_t path) {
    // fresh fBm and Brownian drivers on disjoint streams
    std::vector<std::vector<double>> dw(m, std::vector<double>(n));
    for (int c = 0; c < m; ++c) {
      GaussianCursor gauss(GaussianStream(
          seed, make_stream_id(path, stream_role::kLimitFbm + c)));
      sampler.sample_increments(gauss, dw[c]);
    }
    GaussianCursor bm(GaussianStream(
        seed, make_stream_id(path, stream_role::kLimitBrownian)));

    std::vector<double> theta(static_cast<std::size_t>(n + 1) * m, 0.0);
    std::vector<double> cur(m, 0.0), nxt(m), db(m);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < m; ++j) db[j] = sqrt_h * bm.next();
      const double* jac =
          law.drift_jacobian.data() + static_cast<std::size_t>(k) * m * m;
      const double* sg =
          law.sigma_grid.data() + static_cast<std::size_t>(k) * m * m;
      for (int i = 0; i < m; ++i) {
        double acc = cur[i];
        for (int j = 0; j < m; ++j) {
          acc += jac[static_cast<std::size_t>(i) * m + j] * cur[j] * h;
          acc += law.lambda * sg[static_cast<std::size_t>(i) * m + j] * db[j];
          acc += law.sigma_bar[static_cast<std::size_t>(i) * m + j] * dw[j][k];
        }
        if (has_extra)
          acc += law.extra_drift[static_cast<std::size_t>(k) * m + i] * h;
        nxt[i] = acc;
      }
      cur.swap(nxt);
      std::copy(cur.begin(), cur.end(),
                theta.begin() + static_cast<std::size_t>(k + 1) * m);
    }
    ens.theta[path] = std::move(theta);
  });
  return ens;
}

ComparisonReport compare_distributions(const FluctuationEnsemble& a,
                                       const FluctuationEnsemble& b,
                                       std::span<const double> times,
                                       int moments_up_to,
                                       const ComparisonThresholds& thresholds) {
  if (a.theta.size() < 100 || b.theta.size() < 100)
    throw PreconditionError("compare_distributions: need >= 100 paths per ensemble");
  if (a.n != b.n || a.horizon != b.horizon || a.dim != b.dim)
    throw PreconditionError("compare_distributions: ensembles on different grids");
  if (moments_up_to < 1) moments_up_to = 2;

  ComparisonReport report;
  report.pass = true;
  std::vector<int> indices;
  for (double t : times) {
    int k = static_cast<int>(std::lround(t / a.horizon * a.n));
    k = std::clamp(k, 0, a.n);
    indices.push_back(k);
  }

  for (std::size_t ti = 0; ti < indices.size(); ++ti) {
    const int k = indices[ti];
    for (int c = 0; c < a.dim; ++c) {
      const std::vector<double> ma = a.marginal(k, c);
      const std::vector<double> mb = b.marginal(k, c);
      ComparisonRow row;
      row.time = times[ti];
      row.coord = c;
      row.ks = ks_statistic(ma, mb);
      row.ks_crit = ks_critical_value(thresholds.ks_alpha, ma.size(), mb.size());
      for (int order = 1; order <= moments_up_to; ++order) {
        std::vector<double> pa(ma.size()), pb(mb.size());
        for (std::size_t i = 0; i < ma.size(); ++i) pa[i] = std::pow(ma[i], order);
        for (std::size_t i = 0; i < mb.size(); ++i) pb[i] = std::pow(mb[i], order);
        const MeanStderr sa = mean_stderr(pa);
        const MeanStderr sb = mean_stderr(pb);
        const double pooled =
            std::sqrt(sa.stderr_ * sa.stderr_ + sb.stderr_ * sb.stderr_);
        row.moment_diff.push_back(sa.mean - sb.mean);
        row.moment_z.push_back(pooled > 0.0 ? (sa.mean - sb.mean) / pooled : 0.0);
      }
      report.pass &= row.ks < row.ks_crit;
      for (double z : row.moment_z)
        report.pass &= std::abs(z) < thresholds.moment_z_max;
      report.rows.push_back(std::move(row));
    }
  }

  // covariance across consecutive requested times
  auto cov_se = [](const FluctuationEnsemble& e, int k1, int k2, int c,
                   double& cov, double& se) {
    const std::vector<double> u = e.marginal(k1, c);
    const std::vector<double> v = e.marginal(k2, c);
    const double mu = mean_stderr(u).mean;
    const double mv = mean_stderr(v).mean;
    std::vector<double> prod(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      prod[i] = (u[i] - mu) * (v[i] - mv);
    const MeanStderr ms = mean_stderr(prod);
    cov = ms.mean;
    se = ms.stderr_;
  };
  for (std::size_t ti = 0; ti + 1 < indices.size(); ++ti) {
    for (int c = 0; c < a.dim; ++c) {
      CovComparisonRow row;
      row.t1 = times[ti];
      row.t2 = times[ti + 1];
      row.coord = c;
      double sa = 0.0, sb = 0.0;
      cov_se(a, indices[ti], indices[ti + 1], c, row.cov_a, sa);
      cov_se(b, indices[ti], indices[ti + 1], c, row.cov_b, sb);
      const double pooled = std::sqrt(sa * sa + sb * sb);
      row.z = pooled > 0.0 ? (row.cov_a - row.cov_b) / pooled : 0.0;
      report.pass &= std::abs(row.z) < thresholds.moment_z_max;
      report.cov_rows.push_back(row);
    }
  }
  return report;
}

}  // namespace msfbm
