// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msfbm/rng.hpp"

namespace msfbm {

// Hurst index, restricted to the long-memory range (1/2, 1).
class HurstParameter {
 public:
  explicit HurstParameter(double value);

  // Bypasses the range check.  Exists so tests can evaluate the covariance
  // formulas at H = 1/2 (standard Brownian limit); samplers still require
  // the open interval.
  static HurstParameter unchecked(double value);

  double value() const { return value_; }

 private:
  HurstParameter() = default;
  double value_ = 0.75;
};

// R_H(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2, for s,t >= 0.
double covariance_rh(double s, double t, HurstParameter hurst);

// Autocovariance of the step-Delta increment sequence at integer lag k:
// gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2 * Delta^{2H}.
double fgn_autocovariance(std::int64_t k, HurstParameter hurst, double delta);

struct FbmPath {
  int n = 0;
  double horizon = 0.0;
  std::vector<double> values;  // length n+1, values[0] == 0
  double hurst = 0.75;
  SeedRecord seeds;

  double grid_step() const { return horizon / n; }
};

// Exact fBm sampler on a uniform grid.  Default method embeds the fGn
// autocovariance in a circulant matrix (padded to a power of two) and
// samples through the FFT; if the embedding spectrum fails positive
// semidefiniteness beyond tolerance it falls back to a dense Cholesky
// factor of the exact covariance.
class FbmSampler {
 public:
  enum class Method { CirculantEmbedding, Cholesky };

  FbmSampler(int n, double horizon, HurstParameter hurst);
  // Test hook: force a particular method.
  FbmSampler(int n, double horizon, HurstParameter hurst, Method forced);

  // Fills `increments` (length n) with one fGn realization, consuming the
  // cursor deterministically.  Thread-safe for concurrent calls.
  void sample_increments(GaussianCursor& gauss, std::span<double> increments) const;

  std::vector<double> sample_values(GaussianCursor& gauss) const;

  Method method() const { return method_; }
  int n() const { return n_; }
  double hurst_value() const { return hurst_.value(); }
  double min_eigenvalue_ratio() const { return min_eig_ratio_; }

  static constexpr double kEigenTolerance = 1e-10;

 private:
  void build_circulant();
  void build_cholesky();

  int n_;
  double horizon_;
  HurstParameter hurst_;
  Method method_ = Method::CirculantEmbedding;
  double min_eig_ratio_ = 0.0;

  std::size_t embed_size_ = 0;
  std::vector<double> spectrum_scale_;  // sqrt(lambda_k / M) style factors
  std::vector<double> chol_;            // packed lower triangle (fallback)
};

// One-shot convenience wrapper around FbmSampler.
FbmPath sample_fbm(int n, double horizon, HurstParameter hurst,
                   std::uint64_t seed, std::uint64_t path_index = 0,
                   std::uint64_t role = stream_role::kFbmComponent);

// <phi, psi> in the reproducing Hilbert space of fBm on [0,T]:
//   alpha_H * int int phi(r) psi(u) |r-u|^{2H-2} du dr,  alpha_H = H(2H-1).
// phi and psi are node values on the shared uniform grid; they are treated
// as piecewise linear and the singular kernel is integrated in closed form
// over every cell pair, so the quadrature is uniformly second order.
double h_inner_product(std::span<const double> phi, std::span<const double> psi,
                       double horizon, HurstParameter hurst);

// Closed-form kernel moments over the cell pair [D, D+h] x [0, h]; exposed
// for the quadrature's own oracle tests.
struct KernelCellMoments {
  double m00, m10, m01, m11;
};
KernelCellMoments kernel_cell_moments(double offset, double h, double hurst);

// Exact integral of (r-u)^{2H-2} over {t_j <= u <= r <= t_j + h} (the
// diagonal cell triangle) and over disjoint cell rectangles; used by the
// Ito-residual machinery.
double kernel_rect_integral(double offset, double h, double hurst);
double kernel_triangle_integral(double h, double hurst);

// Driving noise for one path of the coupled system: m independent fBm
// components on the slow grid and the fast-component Brownian increments on
// the refined subgrid.  fBm and Brownian draws come from disjoint streams.
struct NoiseBundle {
  int n = 0;
  double horizon = 0.0;
  int n_sub = 1;
  int dim_fbm = 0;
  int dim_bm = 0;
  double hurst = 0.75;
  SeedRecord seeds;

  std::vector<std::vector<double>> fbm_increments;  // [comp][n]
  std::vector<double> fast_db;  // [((k*n_sub)+s)*dim_bm + c], Var = h/n_sub

  double fbm_increment(int comp, int k) const { return fbm_increments[comp][k]; }
  double fast_increment(int k, int s, int comp) const {
    return fast_db[(static_cast<std::size_t>(k) * n_sub + s) * dim_bm + comp];
  }
};

NoiseBundle make_noise_bundle(const FbmSampler& sampler, int dim_fbm, int dim_bm,
                              int n, double horizon, int n_sub,
                              std::uint64_t seed, std::uint64_t path_index);

// Same fBm increments, fast increments aggregated onto a coarser subgrid
// (n_sub must divide fine.n_sub).  This is the common-random-numbers
// coupling used across scale ladders.
NoiseBundle coarsen_fast_noise(const NoiseBundle& fine, int n_sub);

}  // namespace msfbm
