// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "msfbm/fft.hpp"
#include "msfbm/rng.hpp"
#include "msfbm/stats.hpp"

using namespace msfbm;

TEST_CASE("counter rng is a pure function of (seed, stream, index)") {
  GaussianStream a(42, 7), b(42, 7);
  for (std::uint64_t i : {0ull, 1ull, 2ull, 1000ull, 1ull << 40}) {
    CHECK(a.normal(i) == b.normal(i));
  }
  // random access equals sequential access
  GaussianCursor cur(a);
  for (int i = 0; i < 64; ++i) CHECK(cur.next() == a.normal(i));
}

TEST_CASE("cursor seek matches random access") {
  GaussianStream s(9, 3);
  GaussianCursor cur(s);
  cur.seek(11);
  CHECK(cur.next() == s.normal(11));
  CHECK(cur.next() == s.normal(12));
  cur.seek(4);
  CHECK(cur.next() == s.normal(4));
}

TEST_CASE("distinct streams and seeds decorrelate") {
  GaussianStream a(42, make_stream_id(0, stream_role::kFbmComponent));
  GaussianStream b(42, make_stream_id(0, stream_role::kFastBrownian));
  GaussianStream c(43, make_stream_id(0, stream_role::kFbmComponent));
  const int n = 20000;
  double dot_ab = 0.0, dot_ac = 0.0;
  for (int i = 0; i < n; ++i) {
    dot_ab += a.normal(i) * b.normal(i);
    dot_ac += a.normal(i) * c.normal(i);
  }
  CHECK(std::abs(dot_ab / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(dot_ac / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("gaussian moments") {
  GaussianStream s(123, 456);
  const int n = 200000;
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = s.normal(i);
  const MeanStderr m = mean_stderr(z);
  CHECK(std::abs(m.mean) < 4.0 * m.stderr_);
  CHECK(sample_variance(z) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(sample_skewness(z)) < 4.0 * std::sqrt(6.0 / n));
  CHECK(std::abs(sample_excess_kurtosis(z)) < 4.0 * std::sqrt(24.0 / n));
}

TEST_CASE("fft roundtrip and delta spectrum") {
  std::vector<std::complex<double>> v(64);
  GaussianStream s(5, 5);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = {s.normal(2 * i), s.normal(2 * i + 1)};
  auto w = v;
  fft_inplace(w, false);
  fft_inplace(w, true);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(std::abs(w[i] - v[i]) < 1e-12);

  std::vector<std::complex<double>> delta(8, 0.0);
  delta[0] = 1.0;
  fft_inplace(delta, false);
  for (const auto& c : delta) CHECK(std::abs(c - 1.0) < 1e-14);

  std::vector<std::complex<double>> bad(3);
  CHECK_THROWS(fft_inplace(bad, false));
}

TEST_CASE("next_pow2") {
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(64) == 64);
  CHECK(next_pow2(65) == 128);
}
