// SPDX-License-Identifier: Apache-2.0
#include "msfbm/averaging.hpp"

#include <algorithm>
#include <cmath>

#include "msfbm/errors.hpp"
#include "msfbm/fbm.hpp"
#include "msfbm/parallel.hpp"
#include "msfbm/simulate.hpp"

namespace msfbm {

std::vector<double> averaged_drift(const ModelSpec& model,
                                   const InvariantMeasureEstimate& mu,
                                   std::span<const double> x) {
  if (mu.size() == 0) throw PreconditionError("averaged_drift: empty measure");
  if (mu.dim() != model.dim_y)
    throw PreconditionError("averaged_drift: measure dimension mismatch");
  std::vector<double> out(model.dim_x, 0.0), cx(model.dim_x);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    model.c(x, mu.point(i), cx);
    const double w = mu.weight(i);
    for (int d = 0; d < model.dim_x; ++d) out[d] += w * cx[d];
  }
  return out;
}

std::vector<double> average_y_coefficient(const CoefY& coef,
                                          const InvariantMeasureEstimate& mu,
                                          int out_dim) {
  std::vector<double> out(out_dim, 0.0), buf(out_dim);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    coef(mu.point(i), buf);
    const double w = mu.weight(i);
    for (int d = 0; d < out_dim; ++d) out[d] += w * buf[d];
  }
  return out;
}

DriftFn make_averaged_drift_fn(const ModelSpec& model,
                               const InvariantMeasureEstimate& mu) {
  // Hot path for trajectory work: condense a big Monte Carlo sample onto a
  // histogram first; quadrature measures pass through unchanged.
  InvariantMeasureEstimate measure =
      (mu.dim() == 1 && mu.size() > 4096) ? mu.condense(512) : mu;
  ModelSpec m = model;
  return [m, measure](std::span<const double> x, std::span<double> out) {
    std::vector<double> cx(m.dim_x);
    for (int d = 0; d < m.dim_x; ++d) out[d] = 0.0;
    for (std::size_t i = 0; i < measure.size(); ++i) {
      m.c(x, measure.point(i), cx);
      const double w = measure.weight(i);
      for (int d = 0; d < m.dim_x; ++d) out[d] += w * cx[d];
    }
  };
}

std::vector<double> solve_limit_ode(const DriftFn& drift, std::span<const double> x0,
                                    double horizon, int n) {
  if (n < 1 || horizon <= 0.0)
    throw PreconditionError("solve_limit_ode: need n >= 1 and horizon > 0");
  const int m = static_cast<int>(x0.size());
  const double h = horizon / n;
  std::vector<double> traj(static_cast<std::size_t>(n + 1) * m);
  std::vector<double> x(x0.begin(), x0.end());
  std::copy(x.begin(), x.end(), traj.begin());
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (int step = 0; step < n; ++step) {
    drift(x, k1);
    for (int i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    drift(tmp, k2);
    for (int i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    drift(tmp, k3);
    for (int i = 0; i < m; ++i) tmp[i] = x[i] + h * k3[i];
    drift(tmp, k4);
    for (int i = 0; i < m; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (double v : x)
      if (!std::isfinite(v) || std::abs(v) > kOverflowGuard)
        throw NumericalError("solve_limit_ode: overflow at step " +
                             std::to_string(step + 1));
    std::copy(x.begin(), x.end(),
              traj.begin() + static_cast<std::size_t>(step + 1) * m);
  }
  return traj;
}

double PoissonSolution::value_at(double y) const {
  if (y <= grid.front()) return values.front();
  if (y >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double t = (y - grid[i]) / (grid[i + 1] - grid[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

double PoissonSolution::dvalue_at(double y) const {
  if (y <= grid.front()) return dvalues.front();
  if (y >= grid.back()) return dvalues.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double t = (y - grid[i]) / (grid[i + 1] - grid[i]);
  return dvalues[i] + t * (dvalues[i + 1] - dvalues[i]);
}

double PoissonSolution::sup_abs() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

PoissonSolution solve_poisson_fd_1d(const std::function<double(double)>& drift,
                                    const std::function<double(double)>& tau_sq,
                                    const std::function<double(double)>& rhs,
                                    const InvariantMeasureEstimate& mu,
                                    double y_min, double y_max, int n_grid) {
  if (mu.dim() != 1)
    throw PreconditionError(
        "solve_poisson_fd: only a one-dimensional fast variable is supported; "
        "use solve_poisson_fk for higher dimensions");
  if (n_grid < 5 || !(y_max > y_min))
    throw PreconditionError("solve_poisson_fd: bad grid request");

  // centering precondition on the rhs
  {
    const MeanStderr ms = mu.average_stderr([&](std::span<const double> y) {
      return rhs(y[0]);
    });
    double scale = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      scale = std::max(scale, std::abs(rhs(mu.point(i)[0])));
    // quadrature measures carry no sampling error; only MC measures get slack
    const double mc_slack = mu.uniform_weights() ? 4.0 * ms.stderr_ : 0.0;
    const double tol = std::max(mc_slack, 1e-7 * (1.0 + scale));
    if (std::abs(ms.mean) > tol)
      throw PreconditionError(
          "solve_poisson_fd: rhs is not centered under the measure (|mean| = " +
          std::to_string(std::abs(ms.mean)) + " > tol = " + std::to_string(tol) + ")");
  }

  // The reflecting boundary sits on an internally padded grid so its layer
  // cannot pollute the requested window.
  const double step = (y_max - y_min) / (n_grid - 1);
  const double pad_width = std::max(1.0, 0.15 * (y_max - y_min));
  const int n_pad = static_cast<int>(std::ceil(pad_width / step));
  const int total = n_grid + 2 * n_pad;
  const double lo = y_min - n_pad * step;

  std::vector<double> yv(total), fv(total), t2(total), rv(total);
  for (int i = 0; i < total; ++i) {
    yv[i] = lo + i * step;
    fv[i] = drift(yv[i]);
    t2[i] = tau_sq(yv[i]);
    rv[i] = rhs(yv[i]);
  }

  // Discrete solvability: project the rhs against the stationary density of
  // the generator, m(y) ~ (1/tau^2) exp(int 2 f / tau^2).
  {
    std::vector<double> logm(total);
    logm[0] = 0.0;
    for (int i = 1; i < total; ++i) {
      const double a = 2.0 * fv[i - 1] / t2[i - 1];
      const double b = 2.0 * fv[i] / t2[i];
      logm[i] = logm[i - 1] + 0.5 * step * (a + b);
    }
    const double peak = *std::max_element(logm.begin(), logm.end());
    std::vector<double> dens(total);
    double mass = 0.0, avg = 0.0;
    for (int i = 0; i < total; ++i) {
      dens[i] = std::exp(logm[i] - peak) / t2[i];
      const double w = (i == 0 || i == total - 1) ? 0.5 : 1.0;
      mass += w * dens[i];
      avg += w * dens[i] * rv[i];
    }
    avg /= mass;
    for (int i = 0; i < total; ++i) rv[i] -= avg;
  }

  // tridiagonal system: f Phi' + tau^2/2 Phi'' = -rhs, reflecting ends,
  // one row pinned to fix the constant mode
  std::vector<double> sub(total, 0.0), diag(total, 0.0), sup(total, 0.0),
      b(total, 0.0);
  for (int i = 1; i < total - 1; ++i) {
    const double d2 = 0.5 * t2[i] / (step * step);
    const double d1 = fv[i] / (2.0 * step);
    sub[i] = d2 - d1;
    diag[i] = -2.0 * d2;
    sup[i] = d2 + d1;
    b[i] = -rv[i];
  }
  diag[0] = -1.0;
  sup[0] = 1.0;
  b[0] = 0.0;  // Phi'(lo) = 0
  sub[total - 1] = -1.0;
  diag[total - 1] = 1.0;
  b[total - 1] = 0.0;  // Phi'(hi) = 0
  const int pin = total / 2;
  sub[pin] = 0.0;
  diag[pin] = 1.0;
  sup[pin] = 0.0;
  b[pin] = 0.0;

  // Thomas algorithm
  std::vector<double> cp(total), dp(total);
  cp[0] = sup[0] / diag[0];
  dp[0] = b[0] / diag[0];
  for (int i = 1; i < total; ++i) {
    const double denom = diag[i] - sub[i] * cp[i - 1];
    cp[i] = sup[i] / denom;
    dp[i] = (b[i] - sub[i] * dp[i - 1]) / denom;
  }
  std::vector<double> phi(total);
  phi[total - 1] = dp[total - 1];
  for (int i = total - 2; i >= 0; --i) phi[i] = dp[i] - cp[i] * phi[i + 1];

  PoissonSolution sol;
  sol.grid.assign(yv.begin() + n_pad, yv.begin() + n_pad + n_grid);
  sol.values.assign(phi.begin() + n_pad, phi.begin() + n_pad + n_grid);
  sol.dvalues.resize(n_grid);
  for (int i = 0; i < n_grid; ++i) {
    const int j = n_pad + i;
    sol.dvalues[i] = (phi[j + 1] - phi[j - 1]) / (2.0 * step);
  }

  // center under mu, then certify
  double shift = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    shift += mu.weight(i) * sol.value_at(mu.point(i)[0]);
  for (double& v : sol.values) v -= shift;
  double resid = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    resid += mu.weight(i) * sol.value_at(mu.point(i)[0]);
  sol.centering_residual = std::abs(resid);
  if (sol.centering_residual > kCenteringTol * (1.0 + sol.sup_abs()))
    throw NumericalError("solve_poisson_fd: centering failed, residual = " +
                         std::to_string(sol.centering_residual));
  return sol;
}

PoissonSolution solve_poisson_fd(const ModelSpec& model,
                                 const std::function<double(double)>& rhs,
                                 const InvariantMeasureEstimate& mu,
                                 double y_min, double y_max, int n_grid) {
  if (model.dim_y != 1)
    throw PreconditionError(
        "solve_poisson_fd: model has dim_y > 1; use solve_poisson_fk");
  auto drift = [&model](double y) {
    double out;
    model.f({&y, 1}, {&out, 1});
    return out;
  };
  auto tau2 = [&model](double y) {
    double out;
    model.tau({&y, 1}, {&out, 1});
    return out * out;
  };
  return solve_poisson_fd_1d(drift, tau2, rhs, mu, y_min, y_max, n_grid);
}

FkEstimate solve_poisson_fk(const ModelSpec& model,
                            const std::function<double(std::span<const double>)>& rhs,
                            std::span<const double> y, double t_max, int n_paths,
                            std::uint64_t seed, double lambda_g) {
  if (n_paths < 2) throw PreconditionError("solve_poisson_fk: need n_paths >= 2");
  const double dt = model.meta.relax_time / 50.0;

  std::vector<double> integrals(n_paths, 0.0);
  std::vector<double> terminal(n_paths, 0.0);
  parallel_for(n_paths, 0, [&](std::size_t p) {
    GaussianCursor gauss(GaussianStream(
        seed, make_stream_id(p, stream_role::kFastBrownian)));
    FastRescaledOptions opts;
    opts.y0 = y;
    opts.lambda_g = lambda_g;
    double acc = 0.0;
    double prev = rhs(y);
    double last = prev;
    run_fast_rescaled(model, t_max, dt, opts, gauss,
                      [&](double, std::span<const double> yt) {
                        const double cur = rhs(yt);
                        acc += 0.5 * dt * (prev + cur);  // trapezoid in time
                        prev = cur;
                        last = cur;
                      });
    integrals[p] = acc;
    terminal[p] = last;
  });

  const MeanStderr ms = mean_stderr(integrals);
  const MeanStderr tail = mean_stderr(terminal);
  FkEstimate est;
  est.value = ms.mean;
  est.stderr_ = ms.stderr_;
  // Exponential-decay heuristic for the neglected tail: the terminal
  // integrand level times the declared relaxation time.
  est.tail_bound = std::abs(tail.mean) * model.meta.relax_time +
                   tail.stderr_ * model.meta.relax_time;
  return est;
}

namespace {

void check_admissible_p(const ModelSpec& model, double p, double horizon) {
  const GrowthMeta& meta = model.meta;
  if (meta.bounded_grad_x_c || meta.gamma == 0.0) return;
  const double p_max =
      2.0 * meta.alpha / (horizon * meta.beta * meta.gamma * meta.sup_tau_sq);
  if (!(p < p_max))
    throw PreconditionError(
        "strong_error_table: p = " + std::to_string(p) +
        " outside the admissible range p < 2 alpha / (T beta gamma sup|tau|^2) = " +
        std::to_string(p_max));
}

}  // namespace

std::vector<ErrorRow> strong_error_table(
    const ModelSpec& model, const DriftFn& cbar,
    std::span<const std::pair<double, double>> scale_list, double p,
    int n_paths, int n, double horizon, std::span<const double> x0,
    std::span<const double> y0, std::uint64_t seed, int threads, double hurst) {
  if (scale_list.empty())
    throw PreconditionError("strong_error_table: empty scale list");
  check_admissible_p(model, p, horizon);

  const int m = model.dim_x;
  const int dy = model.dim_y;
  const double h = horizon / n;
  const std::size_t n_levels = scale_list.size();

  const std::vector<double> xbar = solve_limit_ode(cbar, x0, horizon, n);

  // power-of-two substep counts so one fine Brownian path serves every level
  std::vector<int> n_subs(n_levels);
  int n_sub_max = 1;
  for (std::size_t l = 0; l < n_levels; ++l) {
    n_subs[l] = pow2_substeps(h, scale_list[l].second);
    n_sub_max = std::max(n_sub_max, n_subs[l]);
  }

  FbmSampler sampler(n, horizon, HurstParameter(hurst));
  std::vector<std::vector<double>> sup_p(n_levels,
                                         std::vector<double>(n_paths, 0.0));

  parallel_for(n_paths, threads, [&](std::size_t path) {
    const NoiseBundle fine =
        make_noise_bundle(sampler, m, dy, n, horizon, n_sub_max, seed, path);
    for (std::size_t l = 0; l < n_levels; ++l) {
      const NoiseBundle noise = (n_subs[l] == n_sub_max)
                                    ? fine
                                    : coarsen_fast_noise(fine, n_subs[l]);
      // eps = 0 rows run the formal zero-noise limit (eta ladder alone)
      ScaleParams scales = (scale_list[l].first == 0.0)
                               ? ScaleParams::formal_limit(scale_list[l].second)
                               : ScaleParams(scale_list[l].first,
                                             scale_list[l].second);
      const SamplePath traj =
          simulate_pair(model, scales, x0, y0, n, horizon, noise);
      double sup = 0.0;
      for (int k = 0; k <= n; ++k) {
        double d2 = 0.0;
        for (int i = 0; i < m; ++i) {
          const double d = traj.x[static_cast<std::size_t>(k) * m + i] -
                           xbar[static_cast<std::size_t>(k) * m + i];
          d2 += d * d;
        }
        sup = std::max(sup, d2);
      }
      sup_p[l][path] = std::pow(sup, 0.5 * p);
    }
  });

  std::vector<ErrorRow> rows;
  for (std::size_t l = 0; l < n_levels; ++l) {
    const MeanStderr ms = mean_stderr(sup_p[l]);
    rows.push_back({scale_list[l].first, scale_list[l].second, p, ms.mean,
                    ms.stderr_});
  }
  return rows;
}

std::vector<ErrorRow> ergodic_error_table(
    const ModelSpec& model,
    const std::function<double(std::span<const double>, std::span<const double>)>& h_fn,
    const std::function<double(std::span<const double>)>& hbar,
    std::span<const double> eta_list, double p, int n_paths, int n,
    double horizon, std::span<const double> x0, std::span<const double> y0,
    std::uint64_t seed, int threads, double hurst) {
  if (eta_list.empty())
    throw PreconditionError("ergodic_error_table: empty eta list");

  const int m = model.dim_x;
  const int dy = model.dim_y;
  const double h = horizon / n;
  const std::size_t n_levels = eta_list.size();

  std::vector<int> n_subs(n_levels);
  int n_sub_max = 1;
  for (std::size_t l = 0; l < n_levels; ++l) {
    n_subs[l] = pow2_substeps(h, eta_list[l]);
    n_sub_max = std::max(n_sub_max, n_subs[l]);
  }

  FbmSampler sampler(n, horizon, HurstParameter(hurst));
  std::vector<std::vector<double>> sup_p(n_levels,
                                         std::vector<double>(n_paths, 0.0));

  parallel_for(n_paths, threads, [&](std::size_t path) {
    const NoiseBundle fine =
        make_noise_bundle(sampler, m, dy, n, horizon, n_sub_max, seed, path);
    for (std::size_t l = 0; l < n_levels; ++l) {
      const NoiseBundle noise = (n_subs[l] == n_sub_max)
                                    ? fine
                                    : coarsen_fast_noise(fine, n_subs[l]);
      ScaleParams scales(eta_list[l], eta_list[l]);
      // int (h - hbar) ds accumulated on the fast subgrid; sup checked at
      // slow grid times
      double integral = 0.0, sup = 0.0;
      SimObserver obs;
      obs.substep = [&](int, int, std::span<const double> x,
                        std::span<const double> y, double dt) {
        integral += (h_fn(x, y) - hbar(x)) * dt;
      };
      obs.slow_step = [&](int, std::span<const double>, std::span<const double>) {
        sup = std::max(sup, std::abs(integral));
      };
      simulate_pair(model, scales, x0, y0, n, horizon, noise, &obs);
      sup_p[l][path] = std::pow(sup, p);
    }
  });

  std::vector<ErrorRow> rows;
  for (std::size_t l = 0; l < n_levels; ++l) {
    const MeanStderr ms = mean_stderr(sup_p[l]);
    rows.push_back({eta_list[l], eta_list[l], p, ms.mean, ms.stderr_});
  }
  return rows;
}

}  // namespace msfbm
