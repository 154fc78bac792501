// SPDX-License-Identifier: Apache-2.0
#include "msfbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msfbm/errors.hpp"

namespace msfbm {

MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr r;
  r.n = xs.size();
  if (r.n == 0) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - r.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(r.n - 1);
  r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_stderr(xs).mean;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - m;
    ss += d * d;
  }
  return ss / static_cast<double>(xs.size() - 1);
}

double variance_stderr(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) return 0.0;
  const double m = mean_stderr(xs).mean;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  const double nn = static_cast<double>(n);
  // Var(s^2) ~ (m4 - (n-3)/(n-1) m2^2) / n
  const double v = (m4 - (nn - 3.0) / (nn - 1.0) * m2 * m2) / nn;
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

MeanStderr batch_mean_stderr(std::span<const double> xs, std::size_t n_batches) {
  const std::size_t n = xs.size();
  if (n_batches == 0)
    n_batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  if (n_batches < 2 || n < 2 * n_batches) return mean_stderr(xs);
  const std::size_t bs = n / n_batches;
  std::vector<double> means;
  means.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) s += xs[i];
    means.push_back(s / static_cast<double>(bs));
  }
  MeanStderr r = mean_stderr(means);
  r.n = n;
  return r;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw PreconditionError("ks_statistic: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0, fa = 0.0, fb = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double x = std::min(sa[ia], sb[ib]);
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    fa = static_cast<double>(ia) / na;
    fb = static_cast<double>(ib) / nb;
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t na, std::size_t nb) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw PreconditionError("ks_critical_value: alpha must be in (0,1)");
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const double fa = static_cast<double>(na);
  const double fb = static_cast<double>(nb);
  return c * std::sqrt((fa + fb) / (fa * fb));
}

namespace {
// two-sided 97.5% Student-t quantiles for small df, 1.96 beyond
double t975(std::size_t df) {
  static const double tab[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                               2.365,  2.306, 2.262, 2.228, 2.201, 2.179,
                               2.160,  2.145, 2.131, 2.120, 2.110, 2.101,
                               2.093,  2.086, 2.080, 2.074, 2.069, 2.064,
                               2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df == 0) return 12.706;
  if (df <= 30) return tab[df - 1];
  return 1.96;
}
}  // namespace

SlopeFit fit_slope(std::span<const double> scales, std::span<const double> values) {
  const std::size_t n = scales.size();
  if (n != values.size() || n < 3)
    throw PreconditionError("fit_slope: need >= 3 (scale, value) pairs");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (scales[i] <= 0.0 || values[i] <= 0.0)
      throw PreconditionError("fit_slope: scales and values must be positive");
    lx[i] = std::log(scales[i]);
    ly[i] = std::log(values[i]);
  }
  const double mx = mean_stderr(lx).mean;
  const double my = mean_stderr(ly).mean;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += e * e;
  }
  fit.r2 = (syy > 0.0) ? 1.0 - ssr / syy : 1.0;
  if (n > 2) {
    const double s2 = ssr / static_cast<double>(n - 2);
    fit.ci_half_width = t975(n - 2) * std::sqrt(s2 / sxx);
  }
  return fit;
}

double raw_moment(std::span<const double> xs, int order) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += std::pow(x, order);
  return s / static_cast<double>(xs.size());
}

double sample_skewness(std::span<const double> xs) {
  const double m = mean_stderr(xs).mean;
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

double sample_excess_kurtosis(std::span<const double> xs) {
  const double m = mean_stderr(xs).mean;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2) - 3.0;
}

NormalityReport normality_check(std::span<const double> xs, double z_max) {
  NormalityReport r;
  const double n = static_cast<double>(xs.size());
  r.skewness = sample_skewness(xs);
  r.excess_kurtosis = sample_excess_kurtosis(xs);
  r.z_skew = r.skewness / std::sqrt(6.0 / n);
  r.z_kurt = r.excess_kurtosis / std::sqrt(24.0 / n);
  r.pass = std::abs(r.z_skew) < z_max && std::abs(r.z_kurt) < z_max;
  return r;
}

}  // namespace msfbm
