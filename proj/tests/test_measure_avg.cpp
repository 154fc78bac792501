// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msfbm/averaging.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/measure.hpp"
#include "msfbm/stats.hpp"

using namespace msfbm;

TEST_CASE("OU invariant measure moments") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = estimate_invariant_measure(m, 50.0, 200000, 10, 21);
  const MeanStderr m1 = mu.moment_stderr(0, 1);
  const MeanStderr m2 = mu.moment_stderr(0, 2);
  CHECK(std::abs(m1.mean) < 3.5 * m1.stderr_);
  CHECK(std::abs(m2.mean - 0.5) < 3.5 * m2.stderr_ + 0.01);
  CHECK(mu.size() == 200000);
  CHECK(mu.uniform_weights());
}

TEST_CASE("cubic drift keeps the symmetric law symmetric") {
  ModelSpec m = make_registry_model("ou-quadratic");
  m.f = [](std::span<const double> y, std::span<double> o) {
    o[0] = -y[0] * y[0] * y[0] - y[0];
  };
  const InvariantMeasureEstimate mu = estimate_invariant_measure(m, 50.0, 100000, 10, 22);
  const MeanStderr m1 = mu.moment_stderr(0, 1);
  CHECK(std::abs(m1.mean) < 4.0 * m1.stderr_);
  CHECK(std::abs(mu.moment(0, 3)) < 0.05);
}

TEST_CASE("thinning self-consistency") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate a = estimate_invariant_measure(m, 50.0, 60000, 1, 23);
  const InvariantMeasureEstimate b = estimate_invariant_measure(m, 50.0, 60000, 10, 24);
  const MeanStderr ma = a.moment_stderr(0, 2);
  const MeanStderr mb = b.moment_stderr(0, 2);
  const double pooled = std::sqrt(ma.stderr_ * ma.stderr_ + mb.stderr_ * mb.stderr_);
  CHECK(std::abs(ma.mean - mb.mean) < 4.0 * pooled + 0.01);
}

TEST_CASE("recurrence violation rejected before the long run") {
  ModelSpec runaway = make_registry_model("ou-quadratic");
  runaway.f = [](std::span<const double> y, std::span<double> o) { o[0] = y[0]; };
  CHECK_THROWS_AS(estimate_invariant_measure(runaway, 10.0, 1000, 1, 1),
                  PreconditionError);
}

TEST_CASE("gauss-hermite measure is exact on polynomials") {
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 48);
  CHECK(std::abs(mu.moment(0, 1)) < 1e-12);
  CHECK(mu.moment(0, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(mu.moment(0, 3)) < 1e-12);
  CHECK(mu.moment(0, 4) == doctest::Approx(0.75).epsilon(1e-12));
  // shifted and scaled
  const InvariantMeasureEstimate mu2 = gauss_hermite_measure(1.0, 2.0, 48);
  CHECK(mu2.moment(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu2.moment(0, 2) == doctest::Approx(3.0).epsilon(1e-12));  // var + mean^2
}

TEST_CASE("condense preserves low moments") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = estimate_invariant_measure(m, 50.0, 100000, 10, 25);
  const InvariantMeasureEstimate small = mu.condense(256);
  CHECK(small.size() <= 256);
  CHECK(small.moment(0, 1) == doctest::Approx(mu.moment(0, 1)).epsilon(1e-10));
  CHECK(small.moment(0, 2) == doctest::Approx(mu.moment(0, 2)).epsilon(2e-3));
}

TEST_CASE("averaged drift oracles") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = gauss_hermite_measure(0.0, 0.5, 48);
  // c(x,y) = -x + y^2 averages to -x + 1/2
  std::vector<double> x{2.0};
  const std::vector<double> cbar = averaged_drift(m, mu, x);
  CHECK(cbar[0] == doctest::Approx(-2.0 + 0.5).epsilon(1e-10));
  // y-independent c averages to itself
  ModelSpec flat = m;
  flat.c = [](std::span<const double> x_, std::span<const double>,
              std::span<double> o) { o[0] = std::sin(x_[0]); };
  CHECK(averaged_drift(flat, mu, x)[0] == doctest::Approx(std::sin(2.0)).epsilon(1e-14));
  // sigma == 1 averages to 1
  const std::vector<double> sbar = average_y_coefficient(m.sigma, mu, 1);
  CHECK(sbar[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("limit ODE closed form and fourth-order refinement") {
  // dx = (-x + 1/2) dt from x0 = 1: x(T) = 1/2 + 1/2 e^{-T}
  const DriftFn drift = [](std::span<const double> x, std::span<double> o) {
    o[0] = -x[0] + 0.5;
  };
  std::vector<double> x0{1.0};
  const double T = 1.0;
  const double exact = 0.5 + 0.5 * std::exp(-T);
  const std::vector<double> coarse = solve_limit_ode(drift, x0, T, 20);
  const std::vector<double> fine = solve_limit_ode(drift, x0, T, 40);
  const double e_coarse = std::abs(coarse.back() - exact);
  const double e_fine = std::abs(fine.back() - exact);
  CHECK(e_coarse < 1e-7);
  CHECK(e_fine < e_coarse / 12.0);  // ~2^4 with slack

  // constant trajectory under zero drift
  const DriftFn zero = [](std::span<const double>, std::span<double> o) {
    o[0] = 0.0;
  };
  const std::vector<double> still = solve_limit_ode(zero, x0, T, 10);
  for (double v : still) CHECK(v == 1.0);
}

TEST_CASE("weighted measure constructors validate") {
  CHECK_THROWS_AS(InvariantMeasureEstimate::weighted({0.0, 1.0}, {0.5}, 1),
                  PreconditionError);
  CHECK_THROWS_AS(InvariantMeasureEstimate::weighted({0.0}, {-1.0}, 1),
                  PreconditionError);
  const InvariantMeasureEstimate mu =
      InvariantMeasureEstimate::weighted({-1.0, 1.0}, {2.0, 2.0}, 1);
  CHECK(mu.weight(0) == doctest::Approx(0.5));
  CHECK(mu.moment(0, 2) == doctest::Approx(1.0));
}
