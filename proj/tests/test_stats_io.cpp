// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msfbm/errors.hpp"
#include "msfbm/io.hpp"
#include "msfbm/rng.hpp"
#include "msfbm/stats.hpp"

using namespace msfbm;

TEST_CASE("ks statistic on hand-checkable samples") {
  std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  std::vector<double> b{1.0, 2.0, 3.0, 4.0};
  CHECK(ks_statistic(a, b) == doctest::Approx(0.0));
  std::vector<double> c{10.0, 11.0, 12.0, 13.0};
  CHECK(ks_statistic(a, c) == doctest::Approx(1.0));
  // shifted overlap: F_a jumps ahead by half
  std::vector<double> d{2.5, 3.5, 4.5, 5.5};
  CHECK(ks_statistic(a, d) == doctest::Approx(0.5));
  std::vector<double> empty;
  CHECK_THROWS_AS(ks_statistic(a, empty), PreconditionError);
}

TEST_CASE("ks critical value formula") {
  // c(0.01) = sqrt(-ln(0.005)/2) ~ 1.6276
  const double crit = ks_critical_value(0.01, 10000, 10000);
  CHECK(crit == doctest::Approx(1.6276 * std::sqrt(2.0 / 10000.0)).epsilon(1e-3));
  CHECK(ks_critical_value(0.05, 100, 100) ==
        doctest::Approx(1.3581 * std::sqrt(0.02)).epsilon(1e-3));
  CHECK_THROWS_AS(ks_critical_value(0.0, 10, 10), PreconditionError);
}

TEST_CASE("two-sample ks separates distinct gaussians") {
  GaussianStream g(3, 3);
  const int n = 20000;
  std::vector<double> a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    a[i] = g.normal(3 * i);
    b[i] = g.normal(3 * i + 1);
    c[i] = 2.0 * g.normal(3 * i + 2);
  }
  CHECK(ks_statistic(a, b) < ks_critical_value(0.01, n, n));
  CHECK(ks_statistic(a, c) > ks_critical_value(0.01, n, n));
}

TEST_CASE("fit_slope oracles") {
  // exact square law
  std::vector<double> s{1.0, 2.0, 4.0, 8.0};
  std::vector<double> v{1.0, 4.0, 16.0, 64.0};
  const SlopeFit sq = fit_slope(s, v);
  CHECK(sq.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sq.r2 == doctest::Approx(1.0).epsilon(1e-12));

  // constant data
  std::vector<double> flat{3.0, 3.0, 3.0, 3.0};
  CHECK(fit_slope(s, flat).slope == doctest::Approx(0.0));

  // noisy slope-1 synthetic: 5% multiplicative noise over 8 points
  GaussianStream g(17, 1);
  std::vector<double> xs, ys;
  for (int i = 0; i < 8; ++i) {
    const double x = std::pow(2.0, -i);
    xs.push_back(x);
    ys.push_back(x * std::exp(0.05 * g.normal(i)));
  }
  const SlopeFit noisy = fit_slope(xs, ys);
  CHECK(noisy.slope > 0.9);
  CHECK(noisy.slope < 1.1);
  CHECK(noisy.ci_half_width > 0.0);

  std::vector<double> bad{1.0, -2.0, 3.0};
  std::vector<double> s3{1.0, 2.0, 4.0};
  CHECK_THROWS_AS(fit_slope(s3, bad), PreconditionError);
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(fit_slope(two, two), PreconditionError);
}

TEST_CASE("normality check") {
  GaussianStream g(11, 2);
  const int n = 50000;
  std::vector<double> z(n), skewed(n);
  for (int i = 0; i < n; ++i) {
    z[i] = g.normal(i);
    skewed[i] = std::exp(0.8 * z[i]);  // lognormal
  }
  CHECK(normality_check(z).pass);
  CHECK(!normality_check(skewed).pass);
}

TEST_CASE("batch means do not understate correlated noise") {
  // AR(1) with strong correlation: naive SE underestimates
  GaussianStream g(7, 7);
  const int n = 40000;
  std::vector<double> x(n);
  double state = 0.0;
  for (int i = 0; i < n; ++i) {
    state = 0.95 * state + g.normal(i);
    x[i] = state;
  }
  const MeanStderr naive = mean_stderr(x);
  const MeanStderr batched = batch_mean_stderr(x);
  CHECK(batched.stderr_ > 3.0 * naive.stderr_);
}

TEST_CASE("format_double round-trips exactly") {
  GaussianStream g(23, 0);
  for (int i = 0; i < 2000; ++i) {
    const double v = g.normal(i) * std::pow(10.0, (i % 61) - 30);
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
}

TEST_CASE("output sink writes csv and a complete manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "msfbm_sink_test";
  std::filesystem::remove_all(dir);
  OutputSink sink(dir);
  CsvTable t;
  t.header = "a,b";
  t.rows = {{1.0, 2.5}, {-3.0, 0.125}};
  sink.write_csv("table.csv", t);
  sink.write_text("note.txt", "hello\n");
  sink.write_manifest("testcmd", 42, 7);

  std::ifstream in(dir / "manifest.json");
  nlohmann::json j;
  in >> j;
  CHECK(j["command"] == "testcmd");
  CHECK(j["seed"] == 7);
  CHECK(j["files"].size() == 2);
  for (const auto& f : j["files"])
    CHECK(std::filesystem::exists(dir / f.get<std::string>()));
  // every data file in the directory is reachable from the manifest
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    bool found = false;
    for (const auto& f : j["files"]) found |= f.get<std::string>() == name;
    CHECK(found);
  }

  std::ifstream csv(dir / "table.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "a,b");
  std::getline(csv, line);
  CHECK(line == "1,2.5");
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg plots emit well-formed headers") {
  const auto dir = std::filesystem::temp_directory_path() / "msfbm_svg_test";
  std::filesystem::remove_all(dir);
  OutputSink sink(dir);
  std::vector<double> xs{0.5, 0.25, 0.125};
  std::vector<double> ys{0.1, 0.05, 0.025};
  write_loglog_svg(sink, "plot.svg", xs, ys, 1.0, -0.7, "rate");
  std::vector<double> a{1.0, 2.0, 3.0}, b{1.1, 2.1, 2.9};
  write_cdf_overlay_svg(sink, "cdf.svg", a, b, "cdf");
  for (const char* name : {"plot.svg", "cdf.svg"}) {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("<svg") == 0);
    CHECK(ss.str().find("</svg>") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("fnv1a is stable") {
  const std::string s = "abc";
  CHECK(fnv1a_hash({s.data(), s.size()}) == 0xe71fa2190541574bull);
}
