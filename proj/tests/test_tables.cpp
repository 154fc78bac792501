// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msfbm/averaging.hpp"
#include "msfbm/diagnostics.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/measure.hpp"
#include "msfbm/stats.hpp"

using namespace msfbm;

TEST_CASE("self-comparison has exactly zero strong error") {
  // no dynamics at all: X stays at x0 and so does the averaged ODE
  ModelSpec still = make_registry_model("ou-quadratic");
  still.c = [](std::span<const double>, std::span<const double>, std::span<double> o) {
    o[0] = 0.0;
  };
  still.sigma = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
  const DriftFn zero = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
  std::vector<std::pair<double, double>> scales{{0.1, 0.1}, {0.05, 0.05}};
  std::vector<double> x0{1.0}, y0{0.0};
  const auto rows =
      strong_error_table(still, zero, scales, 2.0, 20, 16, 1.0, x0, y0, 3, 2);
  for (const auto& r : rows) {
    CHECK(r.error == 0.0);
    CHECK(r.stderr_ == 0.0);
  }
}

TEST_CASE("strong error decreases along the ladder") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 48);
  const DriftFn cbar = make_averaged_drift_fn(m, mu);
  std::vector<std::pair<double, double>> scales;
  for (int k = 3; k <= 6; ++k)
    scales.emplace_back(std::pow(2.0, -k), std::pow(2.0, -k));
  std::vector<double> x0{1.0}, y0{0.0};
  const auto rows =
      strong_error_table(m, cbar, scales, 2.0, 250, 100, 1.0, x0, y0, 5, 2);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].error < rows[i - 1].error + 2.0 * (rows[i].stderr_ + rows[i - 1].stderr_));
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(std::sqrt(r.eps) + std::sqrt(r.eta));
    ys.push_back(std::sqrt(r.error));
  }
  const SlopeFit fit = fit_slope(xs, ys);
  CHECK(fit.slope > 0.6);
  CHECK(fit.slope < 1.4);
}

TEST_CASE("inadmissible p is rejected with the bound") {
  ModelSpec m = make_registry_model("ou-quadratic");
  m.meta.bounded_grad_x_c = false;
  m.meta.gamma = 1.0;  // p_max = 2*0.9 / (1*2*1*1) = 0.9
  const DriftFn zero = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
  std::vector<std::pair<double, double>> scales{{0.1, 0.1}, {0.05, 0.05}, {0.02, 0.02}};
  std::vector<double> x0{1.0}, y0{0.0};
  CHECK_THROWS_AS(
      strong_error_table(m, zero, scales, 2.0, 4, 8, 1.0, x0, y0, 1, 1),
      PreconditionError);
  // p below the bound passes the guard
  const auto rows = strong_error_table(m, zero, scales, 0.5, 4, 8, 1.0, x0, y0, 1, 1);
  CHECK(rows.size() == 3);
}

TEST_CASE("formal zero-noise ladder isolates the eta rate") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 48);
  const DriftFn cbar = make_averaged_drift_fn(m, mu);
  std::vector<std::pair<double, double>> scales;
  for (int k = 3; k <= 7; ++k) scales.emplace_back(0.0, std::pow(2.0, -k));
  std::vector<double> x0{1.0}, y0{0.0};
  const auto rows =
      strong_error_table(m, cbar, scales, 2.0, 400, 100, 1.0, x0, y0, 21, 2);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    CHECK(r.eps == 0.0);
    xs.push_back(std::sqrt(r.eta));
    ys.push_back(std::sqrt(r.error));
  }
  const SlopeFit fit = fit_slope(xs, ys);
  CHECK(fit.slope > 0.7);
  CHECK(fit.slope < 1.3);
}

TEST_CASE("x-only test function has zero ergodic integrand") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  auto h_fn = [](std::span<const double> x, std::span<const double>) {
    return x[0] * x[0];
  };
  auto hbar = [](std::span<const double> x) { return x[0] * x[0]; };
  std::vector<double> etas{0.1, 0.05, 0.02};
  std::vector<double> x0{1.0}, y0{0.0};
  const auto rows =
      ergodic_error_table(m, h_fn, hbar, etas, 2.0, 10, 16, 1.0, x0, y0, 2, 2);
  for (const auto& r : rows) CHECK(r.error == 0.0);
}

TEST_CASE("monte carlo standard error shrinks like sqrt(n_paths)") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  auto h_fn = [](std::span<const double>, std::span<const double> y) {
    return y[0] * y[0];
  };
  auto hbar = [](std::span<const double>) { return 0.5; };
  std::vector<double> etas{0.05};
  std::vector<double> x0{1.0}, y0{0.0};
  const auto small =
      ergodic_error_table(m, h_fn, hbar, etas, 2.0, 200, 50, 1.0, x0, y0, 11, 2);
  const auto big =
      ergodic_error_table(m, h_fn, hbar, etas, 2.0, 800, 50, 1.0, x0, y0, 11, 2);
  const double ratio = small[0].stderr_ / big[0].stderr_;
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.7);
}

TEST_CASE("exponential moment diagnostic") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  // hypothesis guard: nu*beta*sup_tau^2 >= 2 alpha
  std::vector<double> etas{0.1};
  CHECK_THROWS_AS(exp_moment_diag(m, etas, 1.0, 2.0, 1.0, 8, 10, 1, 1),
                  PreconditionError);

  // nu = 0 gives exactly one
  const ExpMomentTable trivial = exp_moment_diag(m, etas, 0.0, 2.0, 1.0, 8, 50, 1, 2);
  CHECK(trivial.rows[0].estimate == 1.0);
  CHECK(trivial.rows[0].stderr_ == 0.0);

  // OU closed form at nu = 0.3: (1 - 2 nu v)^(-1/2), v = 1/2
  std::vector<double> etas2{0.1, 0.01};
  const ExpMomentTable tab = exp_moment_diag(m, etas2, 0.3, 2.0, 1.0, 8, 3000, 77, 2);
  const double closed = 1.0 / std::sqrt(0.7);
  for (const auto& r : tab.rows)
    CHECK(std::abs(r.estimate - closed) < 4.0 * r.stderr_ + 0.01);
}
