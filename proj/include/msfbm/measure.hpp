// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "msfbm/model.hpp"
#include "msfbm/stats.hpp"

namespace msfbm {

// Weighted-sample representation of the fast process's invariant measure.
// Either uniform weights from a thinned trajectory (Monte Carlo) or explicit
// weights (quadrature nodes, histogram condensation).
class InvariantMeasureEstimate {
 public:
  static InvariantMeasureEstimate from_samples(std::vector<double> points, int dim);
  static InvariantMeasureEstimate weighted(std::vector<double> points,
                                           std::vector<double> weights, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return n_; }
  bool uniform_weights() const { return uniform_; }

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return uniform_ ? inv_n_ : weights_[i]; }
  std::span<const double> points_flat() const { return points_; }

  // Raw moment E[y_comp^order], cached up to order 4.
  double moment(int comp, int order) const;
  // Standard error of the moment; batch means for trajectory samples.
  MeanStderr moment_stderr(int comp, int order) const;

  // Weighted average of an arbitrary scalar function of y.
  double average(const std::function<double(std::span<const double>)>& fn) const;
  MeanStderr average_stderr(const std::function<double(std::span<const double>)>& fn) const;

  // Histogram condensation (dim 1 only): collapses the sample onto `bins`
  // weighted cell centers, for hot loops that average coefficients per step.
  InvariantMeasureEstimate condense(int bins) const;

  double min_coord(int comp) const;
  double max_coord(int comp) const;

 private:
  InvariantMeasureEstimate() = default;
  void cache_moments();

  std::vector<double> points_;   // n * dim
  std::vector<double> weights_;  // empty when uniform
  int dim_ = 1;
  std::size_t n_ = 0;
  bool uniform_ = true;
  double inv_n_ = 0.0;
  std::vector<double> moment_cache_;  // [comp * 4 + (order-1)]
};

// Long-trajectory estimate of the invariant measure of dY = f(Y)dt + tau(Y)dB
// (optionally with +lambda_g*g(Y) drift): burn-in, then keep every `thin`-th
// state until n_samples are collected.  Step = relax_time / 50.
InvariantMeasureEstimate estimate_invariant_measure(const ModelSpec& model,
                                                    double burn_in,
                                                    std::size_t n_samples,
                                                    int thin, std::uint64_t seed,
                                                    double lambda_g = 0.0);

// Gauss-Hermite quadrature measure for N(mean, variance), dim 1.  Exact
// moments; used by deterministic oracles.
InvariantMeasureEstimate gauss_hermite_measure(double mean, double variance,
                                               int n_nodes);

}  // namespace msfbm
