// SPDX-License-Identifier: Apache-2.0
#include "msfbm/simulate.hpp"

#include <cmath>

#include "msfbm/errors.hpp"
#include "msfbm/extended.hpp"

namespace msfbm {

int default_substeps(double slow_step, double eta) {
  const double raw = std::ceil(50.0 * slow_step / eta);
  return static_cast<int>(std::min(raw, 1e6));
}

int pow2_substeps(double slow_step, double eta) {
  const int base = default_substeps(slow_step, eta);
  int p = 1;
  while (p < base) p <<= 1;
  return std::min(p, 1 << 20);
}

namespace {

bool all_finite_and_bounded(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x) || std::abs(x) > kOverflowGuard) return false;
  return true;
}

SamplePath integrate(const ModelSpec& model, const ScaleParams& scales,
                     bool extended_terms, std::span<const double> x0,
                     std::span<const double> y0, int n, double horizon,
                     const NoiseBundle& noise, const SimObserver* observer) {
  const int m = model.dim_x;
  const int dy = model.dim_y;
  if (static_cast<int>(x0.size()) != m || static_cast<int>(y0.size()) != dy)
    throw PreconditionError("simulate: initial condition dimension mismatch");
  if (noise.n != n)
    throw PreconditionError("simulate: noise grid does not refine the slow grid");
  if (noise.dim_fbm != m || noise.dim_bm != dy)
    throw PreconditionError("simulate: noise dimensions do not match the model");
  if (n < 1 || horizon <= 0.0)
    throw PreconditionError("simulate: need n >= 1 and horizon > 0");

  const bool use_b = extended_terms && model.has_b();
  const bool use_g = extended_terms && model.has_g();
  if ((use_b || use_g) && scales.formal_zero_noise)
    throw PreconditionError(
        "simulate: the eps = 0 formal run is undefined for the extended terms");

  const double h = horizon / n;
  const int n_sub = noise.n_sub;
  const double dt = h / n_sub;
  const double sqrt_eps = scales.noise_amplitude();
  const double inv_eta = 1.0 / scales.eta;
  const double inv_sqrt_eta = 1.0 / std::sqrt(scales.eta);
  const double coef_b = use_b ? std::sqrt(scales.eps / scales.eta) : 0.0;
  const double coef_g = use_g ? 1.0 / std::sqrt(scales.eps * scales.eta) : 0.0;

  SamplePath path;
  path.n = n;
  path.horizon = horizon;
  path.dim_x = m;
  path.dim_y = dy;
  path.seeds = noise.seeds;
  path.x.resize(static_cast<std::size_t>(n + 1) * m);
  path.y.resize(static_cast<std::size_t>(n + 1) * dy);
  path.slow_drift_increment.assign(static_cast<std::size_t>(n) * m, 0.0);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> y(y0.begin(), y0.end());
  std::copy(x.begin(), x.end(), path.x.begin());
  std::copy(y.begin(), y.end(), path.y.begin());

  std::vector<double> cx(m), sig(static_cast<std::size_t>(m) * m), bx(m);
  std::vector<double> fy(dy), ty(static_cast<std::size_t>(dy) * dy), gy(dy);
  std::vector<double> drift(m), ynew(dy);

  for (int k = 0; k < n; ++k) {
    // The noise coefficient is evaluated at the left point (independence of
    // sigma(Y) and W^H makes the left-point sum the divergence integral).
    // The drift integral int c(x_k, Y_s) ds is accumulated over the fast
    // substeps with x frozen: sampling Y only on the slow grid would inject
    // an O(h) averaging error that dominates the eps,eta rates under study.
    model.sigma(y, sig);
    std::fill(drift.begin(), drift.end(), 0.0);

    for (int s = 0; s < n_sub; ++s) {
      if (observer && observer->substep) observer->substep(k, s, x, y, dt);
      model.c(x, y, cx);
      for (int i = 0; i < m; ++i) drift[i] += cx[i] * dt;
      if (use_b) {
        model.b(x, y, bx);
        for (int i = 0; i < m; ++i) drift[i] += coef_b * bx[i] * dt;
      }
      model.f(y, fy);
      model.tau(y, ty);
      for (int i = 0; i < dy; ++i) {
        double acc = y[i] + fy[i] * dt * inv_eta;
        for (int j = 0; j < dy; ++j)
          acc += inv_sqrt_eta * ty[static_cast<std::size_t>(i) * dy + j] *
                 noise.fast_increment(k, s, j);
        ynew[i] = acc;
      }
      if (use_g) {
        model.g(y, gy);
        for (int i = 0; i < dy; ++i) ynew[i] += coef_g * gy[i] * dt;
      }
      y.swap(ynew);
    }

    for (int i = 0; i < m; ++i) {
      double acc = x[i] + drift[i];
      for (int j = 0; j < m; ++j)
        acc += sqrt_eps * sig[static_cast<std::size_t>(i) * m + j] *
               noise.fbm_increment(j, k);
      path.slow_drift_increment[static_cast<std::size_t>(k) * m + i] = drift[i];
      x[i] = acc;
    }

    if (!all_finite_and_bounded(x) || !all_finite_and_bounded(y))
      throw NumericalError("simulate: state overflow at slow step " +
                           std::to_string(k + 1) + " (|state| > 1e12)");

    std::copy(x.begin(), x.end(),
              path.x.begin() + static_cast<std::size_t>(k + 1) * m);
    std::copy(y.begin(), y.end(),
              path.y.begin() + static_cast<std::size_t>(k + 1) * dy);
    if (observer && observer->slow_step) observer->slow_step(k + 1, x, y);
  }
  return path;
}

}  // namespace

SamplePath simulate_pair(const ModelSpec& model, const ScaleParams& scales,
                         std::span<const double> x0, std::span<const double> y0,
                         int n, double horizon, const NoiseBundle& noise,
                         const SimObserver* observer) {
  return integrate(model, scales, false, x0, y0, n, horizon, noise, observer);
}

SamplePath simulate_extended(const ModelSpec& model, const ScaleParams& scales,
                             const RegimeSpec& regime,
                             std::span<const double> x0,
                             std::span<const double> y0, int n, double horizon,
                             const NoiseBundle& noise,
                             const SimObserver* observer) {
  const double ratio = std::sqrt(scales.eta) / std::sqrt(scales.eps);
  const double tol =
      0.5 * std::max(1.0, regime.lambda) + std::abs(regime.kappa) * std::sqrt(scales.eps);
  if (std::abs(ratio - regime.lambda) > tol + 1e-12)
    throw PreconditionError(
        "simulate_extended: sqrt(eta)/sqrt(eps) = " + std::to_string(ratio) +
        " is not near the regime's lambda = " + std::to_string(regime.lambda));
  return integrate(model, scales, true, x0, y0, n, horizon, noise, observer);
}

void run_fast_rescaled(const ModelSpec& model, double horizon, double dt,
                       const FastRescaledOptions& opts, GaussianCursor& gauss,
                       const std::function<void(double, std::span<const double>)>& sink) {
  const int dy = model.dim_y;
  if (static_cast<int>(opts.y0.size()) != dy)
    throw PreconditionError("run_fast_rescaled: y0 dimension mismatch");
  if (dt <= 0.0 || horizon <= 0.0)
    throw PreconditionError("run_fast_rescaled: need positive step and horizon");
  const bool use_g = opts.lambda_g != 0.0 && model.has_g();

  std::vector<double> y(opts.y0.begin(), opts.y0.end());
  std::vector<double> fy(dy), ty(static_cast<std::size_t>(dy) * dy), gy(dy),
      ynew(dy);
  const double sdt = std::sqrt(dt);
  const long long steps = static_cast<long long>(std::ceil(horizon / dt));
  for (long long s = 0; s < steps; ++s) {
    model.f(y, fy);
    model.tau(y, ty);
    for (int i = 0; i < dy; ++i) {
      double acc = y[i] + fy[i] * dt;
      for (int j = 0; j < dy; ++j)
        acc += ty[static_cast<std::size_t>(i) * dy + j] * sdt * gauss.next();
      ynew[i] = acc;
    }
    if (use_g) {
      model.g(y, gy);
      for (int i = 0; i < dy; ++i) ynew[i] += opts.lambda_g * gy[i] * dt;
    }
    y.swap(ynew);
    if (!all_finite_and_bounded(y))
      throw NumericalError("run_fast_rescaled: state overflow at step " +
                           std::to_string(s + 1));
    sink(static_cast<double>(s + 1) * dt, y);
  }
}

std::vector<double> simulate_fast_rescaled(const ModelSpec& model, double horizon,
                                           double dt, std::span<const double> y0,
                                           std::uint64_t seed,
                                           std::uint64_t path_index) {
  GaussianCursor gauss(GaussianStream(
      seed, make_stream_id(path_index, stream_role::kFastBrownian)));
  std::vector<double> traj(y0.begin(), y0.end());
  FastRescaledOptions opts;
  opts.y0 = y0;
  run_fast_rescaled(model, horizon, dt, opts, gauss,
                    [&](double, std::span<const double> y) {
                      traj.insert(traj.end(), y.begin(), y.end());
                    });
  return traj;
}

}  // namespace msfbm
