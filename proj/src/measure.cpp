// SPDX-License-Identifier: Apache-2.0
#include "msfbm/measure.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "msfbm/conditions.hpp"
#include "msfbm/errors.hpp"
#include "msfbm/simulate.hpp"

namespace msfbm {

InvariantMeasureEstimate InvariantMeasureEstimate::from_samples(
    std::vector<double> points, int dim) {
  if (dim < 1 || points.empty() || points.size() % dim != 0)
    throw PreconditionError("InvariantMeasureEstimate: bad sample layout");
  InvariantMeasureEstimate m;
  m.points_ = std::move(points);
  m.dim_ = dim;
  m.n_ = m.points_.size() / dim;
  m.uniform_ = true;
  m.inv_n_ = 1.0 / static_cast<double>(m.n_);
  m.cache_moments();
  return m;
}

InvariantMeasureEstimate InvariantMeasureEstimate::weighted(
    std::vector<double> points, std::vector<double> weights, int dim) {
  if (dim < 1 || points.empty() || points.size() % dim != 0)
    throw PreconditionError("InvariantMeasureEstimate: bad sample layout");
  if (weights.size() != points.size() / dim)
    throw PreconditionError("InvariantMeasureEstimate: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0)
      throw PreconditionError("InvariantMeasureEstimate: negative weight");
    total += w;
  }
  if (!(total > 0.0))
    throw PreconditionError("InvariantMeasureEstimate: weights must sum > 0");
  for (double& w : weights) w /= total;

  InvariantMeasureEstimate m;
  m.points_ = std::move(points);
  m.weights_ = std::move(weights);
  m.dim_ = dim;
  m.n_ = m.points_.size() / dim;
  m.uniform_ = false;
  m.inv_n_ = 1.0 / static_cast<double>(m.n_);
  m.cache_moments();
  return m;
}

void InvariantMeasureEstimate::cache_moments() {
  moment_cache_.assign(static_cast<std::size_t>(dim_) * 4, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double w = weight(i);
    for (int d = 0; d < dim_; ++d) {
      const double v = points_[i * dim_ + d];
      double p = 1.0;
      for (int order = 1; order <= 4; ++order) {
        p *= v;
        moment_cache_[static_cast<std::size_t>(d) * 4 + order - 1] += w * p;
      }
    }
  }
}

double InvariantMeasureEstimate::moment(int comp, int order) const {
  if (comp < 0 || comp >= dim_)
    throw PreconditionError("moment: component out of range");
  if (order >= 1 && order <= 4)
    return moment_cache_[static_cast<std::size_t>(comp) * 4 + order - 1];
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    acc += weight(i) * std::pow(points_[i * dim_ + comp], order);
  return acc;
}

MeanStderr InvariantMeasureEstimate::moment_stderr(int comp, int order) const {
  std::vector<double> vals(n_);
  for (std::size_t i = 0; i < n_; ++i)
    vals[i] = std::pow(points_[i * dim_ + comp], order);
  if (uniform_) return batch_mean_stderr(vals);
  MeanStderr r;
  r.n = n_;
  r.mean = moment(comp, order);
  double var = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double d = vals[i] - r.mean;
    var += weight(i) * weight(i) * d * d;
  }
  r.stderr_ = std::sqrt(var);
  return r;
}

double InvariantMeasureEstimate::average(
    const std::function<double(std::span<const double>)>& fn) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) acc += weight(i) * fn(point(i));
  return acc;
}

MeanStderr InvariantMeasureEstimate::average_stderr(
    const std::function<double(std::span<const double>)>& fn) const {
  std::vector<double> vals(n_);
  for (std::size_t i = 0; i < n_; ++i) vals[i] = fn(point(i));
  if (uniform_) return batch_mean_stderr(vals);
  MeanStderr r;
  r.n = n_;
  r.mean = average(fn);
  double var = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double d = vals[i] - r.mean;
    var += weight(i) * weight(i) * d * d;
  }
  r.stderr_ = std::sqrt(var);
  return r;
}

InvariantMeasureEstimate InvariantMeasureEstimate::condense(int bins) const {
  if (dim_ != 1)
    throw PreconditionError("condense: only one-dimensional measures");
  if (bins < 2) throw PreconditionError("condense: need >= 2 bins");
  const double lo = min_coord(0);
  const double hi = max_coord(0);
  if (!(hi > lo)) return *this;
  const double width = (hi - lo) / bins;
  std::vector<double> mass(bins, 0.0), first(bins, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    int b = static_cast<int>((points_[i] - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    const double w = weight(i);
    mass[b] += w;
    first[b] += w * points_[i];
  }
  std::vector<double> pts, wts;
  for (int b = 0; b < bins; ++b) {
    if (mass[b] <= 0.0) continue;
    pts.push_back(first[b] / mass[b]);  // mass centroid, not cell center
    wts.push_back(mass[b]);
  }
  return weighted(std::move(pts), std::move(wts), 1);
}

double InvariantMeasureEstimate::min_coord(int comp) const {
  double v = points_[comp];
  for (std::size_t i = 1; i < n_; ++i)
    v = std::min(v, points_[i * dim_ + comp]);
  return v;
}

double InvariantMeasureEstimate::max_coord(int comp) const {
  double v = points_[comp];
  for (std::size_t i = 1; i < n_; ++i)
    v = std::max(v, points_[i * dim_ + comp]);
  return v;
}

InvariantMeasureEstimate estimate_invariant_measure(const ModelSpec& model,
                                                    double burn_in,
                                                    std::size_t n_samples,
                                                    int thin, std::uint64_t seed,
                                                    double lambda_g) {
  if (n_samples == 0)
    throw PreconditionError("estimate_invariant_measure: need n_samples > 0");
  if (thin < 1) throw PreconditionError("estimate_invariant_measure: thin >= 1");

  // cheap recurrence probe before committing to a long trajectory
  {
    ProbeBox box;
    box.x_lo.assign(model.dim_x, -10.0);
    box.x_hi.assign(model.dim_x, 10.0);
    box.y_lo.assign(model.dim_y, -10.0);
    box.y_hi.assign(model.dim_y, 10.0);
    const ConditionReport rep = check_conditions(model, box, 64);
    const ConditionEntry* rec = rep.find("recurrence");
    if (rec && !rec->pass)
      throw PreconditionError(
          "estimate_invariant_measure: recurrence condition fails on the probe "
          "box; " + rec->detail);
  }

  const int dy = model.dim_y;
  const double dt = model.meta.relax_time / 50.0;
  const double horizon =
      burn_in + static_cast<double>(n_samples) * thin * dt + dt;

  std::vector<double> y0(dy, 0.0);
  std::vector<double> samples;
  samples.reserve(n_samples * dy);

  GaussianCursor gauss(GaussianStream(seed, make_stream_id(0, stream_role::kAux)));
  FastRescaledOptions opts;
  opts.y0 = y0;
  opts.lambda_g = lambda_g;
  long long step = 0;
  const long long burn_steps = static_cast<long long>(std::ceil(burn_in / dt));
  run_fast_rescaled(model, horizon, dt, opts, gauss,
                    [&](double, std::span<const double> y) {
                      ++step;
                      if (step <= burn_steps) return;
                      if ((step - burn_steps) % thin != 0) return;
                      if (samples.size() < n_samples * dy)
                        samples.insert(samples.end(), y.begin(), y.end());
                    });
  samples.resize(n_samples * dy);
  return InvariantMeasureEstimate::from_samples(std::move(samples), dy);
}

InvariantMeasureEstimate gauss_hermite_measure(double mean, double variance,
                                               int n_nodes) {
  if (n_nodes < 2) throw PreconditionError("gauss_hermite_measure: need >= 2 nodes");
  if (variance <= 0.0)
    throw PreconditionError("gauss_hermite_measure: variance must be positive");

  // Golub-Welsch on the Hermite Jacobi matrix.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (int i = 1; i < n_nodes; ++i) {
    const double off = std::sqrt(i / 2.0);
    jac(i, i - 1) = jac(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  const auto& nodes = es.eigenvalues();
  const auto& vecs = es.eigenvectors();

  std::vector<double> pts(n_nodes), wts(n_nodes);
  const double scale = std::sqrt(2.0 * variance);
  for (int i = 0; i < n_nodes; ++i) {
    pts[i] = mean + scale * nodes(i);
    const double v0 = vecs(0, i);
    wts[i] = v0 * v0;  // total mass normalized inside weighted()
  }
  return InvariantMeasureEstimate::weighted(std::move(pts), std::move(wts), 1);
}

}  // namespace msfbm
