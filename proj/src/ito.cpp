// SPDX-License-Identifier: Apache-2.0
#include "msfbm/ito.hpp"

#include <cmath>
#include <vector>

#include "msfbm/errors.hpp"
#include "msfbm/simulate.hpp"

namespace msfbm {

// Discrete change-of-variables check.  The X-integrals are discretized on
// the slow grid with left-point coefficients (the integrator's own
// quadrature); the Y-integrals run on the fast subgrid.  The divergence
// integral against W^H is the left-point sum minus its discrete Malliavin
// trace, with D_u X_s taken as sqrt(eps) sigma(Y_u) exactly as in the
// continuous formula's kernel term.
double ito_residual(const ModelSpec& model, const TestFunction& test_fn,
                    const ScaleParams& scales, std::span<const double> x0,
                    std::span<const double> y0, int n, double horizon,
                    const NoiseBundle& noise) {
  if (!test_fn.value) throw PreconditionError("ito_residual: missing value callback");
  if (!test_fn.grad_x) throw PreconditionError("ito_residual: missing grad_x callback");
  if (!test_fn.grad_y) throw PreconditionError("ito_residual: missing grad_y callback");
  if (!test_fn.hess_x) throw PreconditionError("ito_residual: missing hess_x callback");
  if (!test_fn.hess_y) throw PreconditionError("ito_residual: missing hess_y callback");
  if (noise.n != n)
    throw PreconditionError("ito_residual: noise grid does not match n");

  const int m = model.dim_x;
  const int dy = model.dim_y;
  const double h = horizon / n;
  const int n_sub = noise.n_sub;
  const double dt = h / n_sub;
  const double sqrt_eps = scales.noise_amplitude();
  const double eps = scales.formal_zero_noise ? 0.0 : scales.eps;
  const double inv_eta = 1.0 / scales.eta;
  const double inv_sqrt_eta = 1.0 / std::sqrt(scales.eta);
  const bool use_b = model.has_b();
  const bool use_g = model.has_g();
  const double coef_b = use_b ? std::sqrt(scales.eps / scales.eta) : 0.0;
  const double coef_g = use_g ? 1.0 / std::sqrt(scales.eps * scales.eta) : 0.0;
  const double hurst = noise.hurst;
  const double alpha_h = hurst * (2.0 * hurst - 1.0);

  // kernel integrals over cell pairs at lag d, plus the diagonal triangle
  std::vector<double> rect(n);
  for (int d = 1; d < n; ++d) rect[d] = kernel_rect_integral(d * h, h, hurst);
  const double tri = kernel_triangle_integral(h, hurst);

  std::vector<double> x(x0.begin(), x0.end()), y(y0.begin(), y0.end());
  std::vector<double> cx(m), bx(m), sig(static_cast<std::size_t>(m) * m);
  std::vector<double> fy(dy), gy(dy), ty(static_cast<std::size_t>(dy) * dy);
  std::vector<double> gradx(m), grady(dy);
  std::vector<double> hessx(static_cast<std::size_t>(m) * m),
      hessy(static_cast<std::size_t>(dy) * dy);
  std::vector<double> xnew(m), ynew(dy);

  // history needed by the double-time kernel sums
  std::vector<double> sigma_hist(static_cast<std::size_t>(n) * m * m);
  std::vector<double> hess_sigma_hist(static_cast<std::size_t>(n) * m * m);

  const double lhs0 = test_fn.value(x, y);

  double riemann_x = 0.0, stoch_x = 0.0, y_part = 0.0, hessy_part = 0.0;
  double alpha_term = 0.0, malliavin_corr = 0.0;

  for (int k = 0; k < n; ++k) {
    model.sigma(y, sig);
    test_fn.grad_x(x, y, gradx);
    test_fn.hess_x(x, y, hessx);

    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        stoch_x += sqrt_eps * gradx[i] * sig[static_cast<std::size_t>(i) * m + j] *
                   noise.fbm_increment(j, k);

    // hess_x : sigma(y_k) sigma(y_l)^T contracted against the kernel cells
    std::copy(sig.begin(), sig.end(),
              sigma_hist.begin() + static_cast<std::size_t>(k) * m * m);
    // (hess_x^T sigma)(k) cached so the inner loop is a plain dot product
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
          acc += hessx[static_cast<std::size_t>(i) * m + a] *
                 sig[static_cast<std::size_t>(i) * m + j];
        hess_sigma_hist[(static_cast<std::size_t>(k) * m + a) * m + j] = acc;
      }

    double diag_s = 0.0;
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < m; ++j)
        diag_s += hess_sigma_hist[(static_cast<std::size_t>(k) * m + a) * m + j] *
                  sig[static_cast<std::size_t>(a) * m + j];
    alpha_term += eps * alpha_h * diag_s * tri;

    for (int l = 0; l < k; ++l) {
      double s_kl = 0.0;
      for (int a = 0; a < m; ++a)
        for (int j = 0; j < m; ++j)
          s_kl += hess_sigma_hist[(static_cast<std::size_t>(k) * m + a) * m + j] *
                  sigma_hist[(static_cast<std::size_t>(l) * m + a) * m + j];
      const double cell = eps * alpha_h * s_kl * rect[k - l];
      alpha_term += cell;
      malliavin_corr += cell;
    }

    // substep loop: drift integral for x (x frozen), Ito sums for y
    std::fill(xnew.begin(), xnew.end(), 0.0);  // drift accumulator this step
    for (int s = 0; s < n_sub; ++s) {
      model.c(x, y, cx);
      test_fn.grad_x(x, y, gradx);
      for (int i = 0; i < m; ++i) {
        xnew[i] += cx[i] * dt;
        riemann_x += gradx[i] * cx[i] * dt;
      }
      if (use_b) {
        model.b(x, y, bx);
        for (int i = 0; i < m; ++i) {
          xnew[i] += coef_b * bx[i] * dt;
          riemann_x += gradx[i] * coef_b * bx[i] * dt;
        }
      }
      model.f(y, fy);
      model.tau(y, ty);
      test_fn.grad_y(x, y, grady);
      test_fn.hess_y(x, y, hessy);
      if (use_g) model.g(y, gy);

      for (int i = 0; i < dy; ++i) {
        double acc = y[i] + fy[i] * dt * inv_eta;
        for (int j = 0; j < dy; ++j)
          acc += inv_sqrt_eta * ty[static_cast<std::size_t>(i) * dy + j] *
                 noise.fast_increment(k, s, j);
        if (use_g) acc += coef_g * gy[i] * dt;
        ynew[i] = acc;
      }
      for (int i = 0; i < dy; ++i) y_part += grady[i] * (ynew[i] - y[i]);

      double tt = 0.0;
      for (int i = 0; i < dy; ++i)
        for (int j = 0; j < dy; ++j) {
          double tautau = 0.0;
          for (int r = 0; r < dy; ++r)
            tautau += ty[static_cast<std::size_t>(i) * dy + r] *
                      ty[static_cast<std::size_t>(j) * dy + r];
          tt += hessy[static_cast<std::size_t>(i) * dy + j] * tautau;
        }
      hessy_part += 0.5 * inv_eta * tt * dt;

      y.swap(ynew);
    }
    for (int i = 0; i < m; ++i) {
      double acc = x[i] + xnew[i];
      for (int j = 0; j < m; ++j)
        acc += sqrt_eps * sig[static_cast<std::size_t>(i) * m + j] *
               noise.fbm_increment(j, k);
      x[i] = acc;
    }
    for (double v : x)
      if (!std::isfinite(v) || std::abs(v) > kOverflowGuard)
        throw NumericalError("ito_residual: state overflow at step " +
                             std::to_string(k + 1));
  }

  const double lhs = test_fn.value(x, y) - lhs0;
  const double rhs =
      riemann_x + (stoch_x - malliavin_corr) + y_part + hessy_part + alpha_term;
  return std::abs(lhs - rhs);
}

}  // namespace msfbm
