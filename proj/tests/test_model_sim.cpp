// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msfbm/averaging.hpp"
#include "msfbm/conditions.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/measure.hpp"
#include "msfbm/parallel.hpp"
#include "msfbm/simulate.hpp"
#include "msfbm/stats.hpp"

using namespace msfbm;

namespace {

ModelSpec still_model() {
  ModelSpec m = make_registry_model("ou-quadratic");
  m.c = [](std::span<const double>, std::span<const double>, std::span<double> o) {
    o[0] = 0.0;
  };
  m.sigma = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
  return m;
}

NoiseBundle noise_for(const ModelSpec& m, int n, double T, int n_sub,
                      std::uint64_t seed, std::uint64_t path) {
  FbmSampler sampler(n, T, HurstParameter(0.75));
  return make_noise_bundle(sampler, m.dim_x, m.dim_y, n, T, n_sub, seed, path);
}

}  // namespace

TEST_CASE("registry") {
  for (const auto& name : registry_model_names()) {
    const ModelSpec m = make_registry_model(name);
    CHECK(m.name == name);
    CHECK(m.dim_x == 1);
  }
  CHECK(make_registry_model("ou-quadratic-ext").has_b());
  CHECK(!make_registry_model("ou-quadratic").has_b());
  CHECK_THROWS_AS(make_registry_model("nope"), ConfigError);
}

TEST_CASE("scale params validation") {
  CHECK_THROWS_AS(ScaleParams(0.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(ScaleParams(0.1, 0.0), PreconditionError);
  CHECK_THROWS_AS(ScaleParams(0.1, 0.1, -1.0), PreconditionError);
  const ScaleParams formal = ScaleParams::formal_limit(0.01);
  CHECK(formal.eps == 0.0);
  CHECK(formal.noise_amplitude() == 0.0);
  CHECK(ScaleParams(0.04, 0.01).noise_amplitude() == doctest::Approx(0.2));
}

TEST_CASE("substep counts") {
  CHECK(default_substeps(0.01, 0.01) == 50);
  CHECK(default_substeps(0.005, 1.0) == 1);
  CHECK(default_substeps(1.0, 1e-9) == 1000000);  // capped
  CHECK(pow2_substeps(0.01, 0.01) == 64);
  CHECK(pow2_substeps(0.005, 1.0) == 1);
}

TEST_CASE("conditions on the OU test model") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  ProbeBox box;
  box.x_lo = {-3.0};
  box.x_hi = {3.0};
  box.y_lo = {-10.0};
  box.y_hi = {10.0};
  const ConditionReport rep = check_conditions(m, box, 256);
  CHECK(rep.all_pass);
  CHECK(rep.find("recurrence")->pass);
  CHECK(rep.find("nondegenerate_sigma")->pass);
  CHECK(rep.find("bounded_nondegenerate_tau")->pass);
  CHECK(rep.find("growth_c")->pass);
  CHECK(rep.format().find("all conditions pass") != std::string::npos);

  // pointwise margin: -y^2 + 0.9 y^2 + 1/2 <= 0 iff y^2 >= 5
  double y_in = 3.0, y_out = 2.0;
  CHECK(recurrence_margin(m, {&y_in, 1}, 1.0) < 0.0);
  CHECK(recurrence_margin(m, {&y_out, 1}, 1.0) > 0.0);
}

TEST_CASE("condition failures carry witnesses") {
  ModelSpec bad = make_registry_model("ou-quadratic");
  bad.f = [](std::span<const double> y, std::span<double> o) { o[0] = +y[0]; };
  ProbeBox box;
  box.x_lo = {-3.0};
  box.x_hi = {3.0};
  box.y_lo = {-10.0};
  box.y_hi = {10.0};
  const ConditionReport rep = check_conditions(bad, box, 128);
  CHECK(!rep.all_pass);
  CHECK(!rep.find("recurrence")->pass);
  CHECK(!rep.find("recurrence")->witness.empty());

  ModelSpec degenerate = make_registry_model("ou-quadratic");
  degenerate.sigma = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
  const ConditionReport rep2 = check_conditions(degenerate, box, 128);
  CHECK(!rep2.find("nondegenerate_sigma")->pass);
}

TEST_CASE("no dynamics, no motion") {
  const ModelSpec m = still_model();
  const int n = 16;
  const NoiseBundle noise = noise_for(m, n, 1.0, 4, 5, 0);
  std::vector<double> x0{1.25}, y0{0.5};
  const SamplePath p = simulate_pair(m, ScaleParams(0.1, 0.1), x0, y0, n, 1.0, noise);
  for (int k = 0; k <= n; ++k) CHECK(p.x_at(k)[0] == 1.25);
}

TEST_CASE("fast component reaches the OU stationary variance") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const int n = 64;
  const double T = 1.0;
  const ScaleParams scales(1e-3, 1e-3);
  const int n_sub = default_substeps(T / n, scales.eta);
  const int n_paths = 2500;
  std::vector<double> terminal(n_paths);
  parallel_for(n_paths, 2, [&](std::size_t p) {
    const NoiseBundle noise = noise_for(m, n, T, n_sub, 17, p);
    std::vector<double> x0{0.0}, y0{0.0};
    const SamplePath path = simulate_pair(m, scales, x0, y0, n, T, noise);
    terminal[p] = path.y_at(n)[0];
  });
  CHECK(sample_variance(terminal) == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("determinism is independent of thread count") {
  const ModelSpec m = make_registry_model("ou-quadratic-sigma");
  const int n = 32, n_paths = 8;
  const ScaleParams scales(0.05, 0.02);
  const int n_sub = default_substeps(1.0 / n, scales.eta);
  auto run = [&](int threads) {
    std::vector<std::vector<double>> out(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t p) {
      const NoiseBundle noise = noise_for(m, n, 1.0, n_sub, 99, p);
      std::vector<double> x0{1.0}, y0{0.3};
      out[p] = simulate_pair(m, scales, x0, y0, n, 1.0, noise).x;
    });
    return out;
  };
  const auto serial = run(1);
  const auto threaded = run(4);
  for (int p = 0; p < n_paths; ++p) CHECK(serial[p] == threaded[p]);
}

TEST_CASE("overflow aborts with a tagged step") {
  ModelSpec runaway = make_registry_model("ou-quadratic");
  runaway.f = [](std::span<const double> y, std::span<double> o) {
    o[0] = 40.0 * y[0] + 1.0;
  };
  const NoiseBundle noise = noise_for(runaway, 16, 1.0, 32, 1, 0);
  std::vector<double> x0{0.0}, y0{1.0};
  CHECK_THROWS_AS(simulate_pair(runaway, ScaleParams(0.1, 0.01), x0, y0, 16, 1.0, noise),
                  NumericalError);
}

TEST_CASE("noise grid preconditions") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const NoiseBundle noise = noise_for(m, 16, 1.0, 4, 1, 0);
  std::vector<double> x0{0.0}, y0{0.0};
  CHECK_THROWS_AS(simulate_pair(m, ScaleParams(0.1, 0.1), x0, y0, 32, 1.0, noise),
                  PreconditionError);
}

TEST_CASE("formal zero-noise run lands on the averaged ODE") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const int n = 200;
  const double T = 1.0;
  const ScaleParams scales = ScaleParams::formal_limit(1e-4);
  const int n_sub = default_substeps(T / n, scales.eta);
  const int n_paths = 40;
  std::vector<double> terminal(n_paths);
  parallel_for(n_paths, 2, [&](std::size_t p) {
    const NoiseBundle noise = noise_for(m, n, T, n_sub, 31, p);
    std::vector<double> x0{1.0}, y0{0.0};
    terminal[p] = simulate_pair(m, scales, x0, y0, n, T, noise).x_at(n)[0];
  });
  const double exact = 0.5 + 0.5 * std::exp(-T);  // cbar(x) = -x + 1/2
  const MeanStderr ms = mean_stderr(terminal);
  CHECK(std::abs(ms.mean - exact) <
        4.0 * ms.stderr_ + 2.0 * (std::sqrt(scales.eta) + T / n));
}

TEST_CASE("noise term is centered at every grid time") {
  const ModelSpec m = make_registry_model("ou-quadratic-sigma");
  const int n = 32;
  const double T = 1.0;
  const ScaleParams scales(0.04, 0.02);
  const int n_sub = default_substeps(T / n, scales.eta);
  const int n_paths = 4000;
  std::vector<std::vector<double>> noise_sums(n_paths);
  parallel_for(n_paths, 2, [&](std::size_t p) {
    const NoiseBundle noise = noise_for(m, n, T, n_sub, 1234, p);
    std::vector<double> x0{1.0}, y0{0.0};
    const SamplePath path = simulate_pair(m, scales, x0, y0, n, T, noise);
    std::vector<double> acc(n + 1, 0.0);
    std::vector<double> sig(1);
    for (int k = 0; k < n; ++k) {
      m.sigma(path.y_at(k), sig);
      acc[k + 1] = acc[k] + sig[0] * noise.fbm_increment(0, k);
    }
    noise_sums[p] = std::move(acc);
  });
  for (int k = 1; k <= n; ++k) {
    std::vector<double> col(n_paths);
    for (int p = 0; p < n_paths; ++p) col[p] = noise_sums[p][k];
    const MeanStderr ms = mean_stderr(col);
    CHECK(std::abs(ms.mean) < 4.0 * ms.stderr_);
  }
}

TEST_CASE("rescaled fast process oracles") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  // long-run mean 0, variance 1/2
  {
    std::vector<double> y0{0.0};
    const std::vector<double> traj = simulate_fast_rescaled(m, 4000.0, 0.02, y0, 77);
    std::vector<double> tail(traj.begin() + traj.size() / 4, traj.end());
    const MeanStderr ms = batch_mean_stderr(tail);
    CHECK(std::abs(ms.mean) < 4.0 * ms.stderr_);
    CHECK(sample_variance(tail) == doctest::Approx(0.5).epsilon(0.05));
  }
  // tau = 0: deterministic exponential decay
  {
    ModelSpec det = m;
    det.tau = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
    std::vector<double> y0{2.0};
    const double dt = 1e-3;
    const std::vector<double> traj = simulate_fast_rescaled(det, 1.0, dt, y0, 1);
    CHECK(traj.back() == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(2e-3));
  }
  // f = 0: variance grows like t
  {
    ModelSpec bm = m;
    bm.f = [](std::span<const double>, std::span<double> o) { o[0] = 0.0; };
    const int n_paths = 3000;
    std::vector<double> t1(n_paths);
    parallel_for(n_paths, 2, [&](std::size_t p) {
      std::vector<double> y0{0.0};
      t1[p] = simulate_fast_rescaled(bm, 1.0, 0.01, y0, 5, p).back();
    });
    CHECK(sample_variance(t1) == doctest::Approx(1.0).epsilon(0.08));
  }
}

TEST_CASE("fast marginal approaches the invariant law as eta shrinks") {
  const ModelSpec m = make_registry_model("ou-quadratic");
  const InvariantMeasureEstimate mu = estimate_invariant_measure(m, 50.0, 40000, 10, 4);
  std::vector<double> mu_draws(mu.points_flat().begin(), mu.points_flat().end());

  const int n = 16;
  const double T = 0.5;
  const int n_paths = 3000;
  std::vector<double> ks_by_eta;
  for (double eta : {0.5, 0.02}) {
    const ScaleParams scales(eta, eta);
    const int n_sub = default_substeps(T / n, eta);
    std::vector<double> terminal(n_paths);
    parallel_for(n_paths, 2, [&](std::size_t p) {
      const NoiseBundle noise = noise_for(m, n, T, n_sub, 2024, p);
      std::vector<double> x0{0.0}, y0{1.5};
      terminal[p] = simulate_pair(m, scales, x0, y0, n, T, noise).y_at(n)[0];
    });
    ks_by_eta.push_back(ks_statistic(terminal, mu_draws));
  }
  CHECK(ks_by_eta[1] < ks_by_eta[0]);
}
