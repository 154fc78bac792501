// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msfbm {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> xs);

double sample_variance(std::span<const double> xs);

// Standard error of the sample variance (normal-theory approximation
// using the empirical fourth moment).
double variance_stderr(std::span<const double> xs);

// Standard error of a time-series mean via non-overlapping batch means;
// honest for correlated samples (e.g. thinned trajectory output).
MeanStderr batch_mean_stderr(std::span<const double> xs, std::size_t n_batches = 0);

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Large-sample critical value c(alpha) * sqrt((na+nb)/(na*nb)).
double ks_critical_value(double alpha, std::size_t na, std::size_t nb);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double ci_half_width = 0.0;  // 95% half-width on the slope
};

// OLS of log(value) on log(scale).  Requires >= 3 pairs, positive values.
SlopeFit fit_slope(std::span<const double> scales, std::span<const double> values);

// Moment-based normality check: standardized skewness and excess kurtosis.
struct NormalityReport {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double z_skew = 0.0;
  double z_kurt = 0.0;
  bool pass = false;
};

NormalityReport normality_check(std::span<const double> xs, double z_max = 4.0);

double sample_skewness(std::span<const double> xs);
double sample_excess_kurtosis(std::span<const double> xs);

// Raw moment sum(x^k)/n.
double raw_moment(std::span<const double> xs, int order);

}  // namespace msfbm
