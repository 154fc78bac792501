// SPDX-License-Identifier: Apache-2.0
#include "msfbm/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "msfbm/errors.hpp"
#include "msfbm/fft.hpp"

namespace msfbm {

HurstParameter::HurstParameter(double value) : value_(value) {
  if (!(value > 0.5 && value < 1.0))
    throw PreconditionError("HurstParameter: H must lie in (0.5, 1), got " +
                            std::to_string(value));
}

HurstParameter HurstParameter::unchecked(double value) {
  HurstParameter h;
  h.value_ = value;
  return h;
}

double covariance_rh(double s, double t, HurstParameter hurst) {
  if (s < 0.0 || t < 0.0)
    throw PreconditionError("covariance_rh: times must be nonnegative");
  const double two_h = 2.0 * hurst.value();
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) -
                std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::int64_t k, HurstParameter hurst, double delta) {
  if (delta <= 0.0)
    throw PreconditionError("fgn_autocovariance: step must be positive");
  if (k < 0) k = -k;
  const double two_h = 2.0 * hurst.value();
  const double kk = static_cast<double>(k);
  const double second_diff = std::pow(kk + 1.0, two_h) -
                             2.0 * std::pow(kk, two_h) +
                             std::pow(std::abs(kk - 1.0), two_h);
  return 0.5 * second_diff * std::pow(delta, two_h);
}

FbmSampler::FbmSampler(int n, double horizon, HurstParameter hurst)
    : n_(n), horizon_(horizon), hurst_(hurst) {
  if (n < 1) throw PreconditionError("FbmSampler: need n >= 1");
  if (horizon <= 0.0) throw PreconditionError("FbmSampler: need horizon > 0");
  build_circulant();
  if (method_ == Method::Cholesky) build_cholesky();
}

FbmSampler::FbmSampler(int n, double horizon, HurstParameter hurst, Method forced)
    : n_(n), horizon_(horizon), hurst_(hurst) {
  if (n < 1) throw PreconditionError("FbmSampler: need n >= 1");
  if (horizon <= 0.0) throw PreconditionError("FbmSampler: need horizon > 0");
  if (forced == Method::CirculantEmbedding) {
    build_circulant();
    if (method_ == Method::Cholesky)
      throw NumericalError("FbmSampler: circulant embedding not PSD for this grid");
  } else {
    method_ = Method::Cholesky;
    build_cholesky();
  }
}

void FbmSampler::build_circulant() {
  const double delta = horizon_ / n_;
  const std::size_t m = std::max<std::size_t>(2, next_pow2(2 * static_cast<std::size_t>(n_)));
  embed_size_ = m;
  const std::size_t half = m / 2;

  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lag = std::min(j, m - j);
    row[j] = fgn_autocovariance(static_cast<std::int64_t>(lag), hurst_, delta);
  }
  fft_inplace(row, false);

  double max_eig = 0.0, min_eig = 0.0;
  for (const auto& e : row) {
    max_eig = std::max(max_eig, e.real());
    min_eig = std::min(min_eig, e.real());
  }
  min_eig_ratio_ = (max_eig > 0.0) ? min_eig / max_eig : 0.0;
  if (min_eig < -kEigenTolerance * max_eig) {
    method_ = Method::Cholesky;
    return;
  }

  // Scale factors for the Hermitian-symmetric spectral coefficients:
  // index 0 and m/2 carry real coefficients with variance lambda/m, interior
  // frequencies carry complex coefficients with per-component variance
  // lambda/(2m).
  spectrum_scale_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lam = std::max(0.0, row[k].real());
    const double denom = (k == 0 || k == half) ? static_cast<double>(m)
                                               : 2.0 * static_cast<double>(m);
    spectrum_scale_[k] = std::sqrt(lam / denom);
  }
  method_ = Method::CirculantEmbedding;
}

void FbmSampler::build_cholesky() {
  if (n_ > (1 << 14))
    throw NumericalError(
        "FbmSampler: Cholesky fallback capped at n <= 2^14; circulant spectrum "
        "min/max eigenvalue ratio was " + std::to_string(min_eig_ratio_));
  const double delta = horizon_ / n_;
  Eigen::MatrixXd cov(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = fgn_autocovariance(i - j, hurst_, delta);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "FbmSampler: exact fGn covariance is not positive definite "
        "(Cholesky failed); H=" + std::to_string(hurst_.value()) +
        ", n=" + std::to_string(n_));
  Eigen::MatrixXd lower = llt.matrixL();
  chol_.resize(static_cast<std::size_t>(n_) * (n_ + 1) / 2);
  std::size_t idx = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) chol_[idx++] = lower(i, j);
}

void FbmSampler::sample_increments(GaussianCursor& gauss,
                                   std::span<double> increments) const {
  if (increments.size() != static_cast<std::size_t>(n_))
    throw PreconditionError("FbmSampler: increment buffer size mismatch");

  if (method_ == Method::Cholesky) {
    std::vector<double> z(n_);
    for (int i = 0; i < n_; ++i) z[i] = gauss.next();
    std::size_t idx = 0;
    for (int i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (int j = 0; j <= i; ++j) acc += chol_[idx++] * z[j];
      increments[i] = acc;
    }
    return;
  }

  const std::size_t m = embed_size_;
  const std::size_t half = m / 2;
  std::vector<std::complex<double>> coef(m);
  coef[0] = spectrum_scale_[0] * gauss.next();
  for (std::size_t k = 1; k < half; ++k) {
    const double re = gauss.next();
    const double im = gauss.next();
    coef[k] = spectrum_scale_[k] * std::complex<double>(re, im);
    coef[m - k] = std::conj(coef[k]);
  }
  coef[half] = spectrum_scale_[half] * gauss.next();

  fft_inplace(coef, false);
  for (int j = 0; j < n_; ++j) increments[j] = coef[j].real();
}

std::vector<double> FbmSampler::sample_values(GaussianCursor& gauss) const {
  std::vector<double> inc(n_);
  sample_increments(gauss, inc);
  std::vector<double> values(n_ + 1);
  values[0] = 0.0;
  for (int i = 0; i < n_; ++i) values[i + 1] = values[i] + inc[i];
  return values;
}

FbmPath sample_fbm(int n, double horizon, HurstParameter hurst,
                   std::uint64_t seed, std::uint64_t path_index,
                   std::uint64_t role) {
  FbmSampler sampler(n, horizon, hurst);
  GaussianCursor gauss(GaussianStream(seed, make_stream_id(path_index, role)));
  FbmPath path;
  path.n = n;
  path.horizon = horizon;
  path.hurst = hurst.value();
  path.seeds = {seed, path_index};
  path.values = sampler.sample_values(gauss);
  return path;
}

namespace {

// Antiderivative ladder of the kernel K0(z) = |z|^{2H-2}:
//   K1' = K0, K2' = K1, K3' = K2, K4' = K3.
// All continuous through z = 0 because the exponents stay positive.
struct KernelPrimitives {
  double p1, p2, p3, p4;
  explicit KernelPrimitives(double hurst) {
    p1 = 2.0 * hurst - 1.0;
    p2 = 2.0 * hurst;
    p3 = 2.0 * hurst + 1.0;
    p4 = 2.0 * hurst + 2.0;
  }
  double k1(double z) const {
    return std::copysign(std::pow(std::abs(z), p1), z) / p1;
  }
  double k2(double z) const { return std::pow(std::abs(z), p2) / (p1 * p2); }
  double k3(double z) const {
    return std::copysign(std::pow(std::abs(z), p3), z) / (p1 * p2 * p3);
  }
  double k4(double z) const {
    return std::pow(std::abs(z), p4) / (p1 * p2 * p3 * p4);
  }
};

}  // namespace

// Unnormalized moments over the cell pair r in [D, D+h], u in [0, h] with
// a = r - D, b = u:
//   m00 = int int K0,  m10 = int int a K0,  m01 = int int b K0,
//   m11 = int int a b K0,  K0(z) = |z|^{2H-2} at z = a - b + D.
// Derivation uses the inner integral
//   I1(a) = int_0^h b K0(a-b+D) db = K2(z+) - K2(z-) - h K1(z-),
// with z+ = a+D, z- = a+D-h, and the primitive ladder above.
KernelCellMoments kernel_cell_moments(double offset, double h, double hurst) {
  const KernelPrimitives kp(hurst);
  const double zm = offset - h;  // z-
  const double z0 = offset;
  const double zp = offset + h;  // z+

  const double k2m = kp.k2(zm), k20 = kp.k2(z0), k2p = kp.k2(zp);
  const double k3m = kp.k3(zm), k30 = kp.k3(z0), k3p = kp.k3(zp);
  const double k4m = kp.k4(zm), k40 = kp.k4(z0), k4p = kp.k4(zp);
  const double d = offset;

  KernelCellMoments mom{};
  mom.m00 = k2p - 2.0 * k20 + k2m;

  const double dk3 = k3p - 2.0 * k30 + k3m;
  mom.m10 = h * (k2p - k20) - dk3;
  mom.m01 = dk3 - h * (k20 - k2m);

  // m11 = int a K2(z+) da - int a K2(z-) da - h int a K1(z-) da
  const double i_a_k2_plus =
      ((zp * k3p - k4p) - (z0 * k30 - k40)) - d * (k3p - k30);
  const double i_a_k2_minus =
      ((z0 * k30 - k40) - (zm * k3m - k4m)) + (h - d) * (k30 - k3m);
  const double i_a_k1_minus =
      ((z0 * k20 - k30) - (zm * k2m - k3m)) + (h - d) * (k20 - k2m);
  mom.m11 = i_a_k2_plus - i_a_k2_minus - h * i_a_k1_minus;
  return mom;
}

double kernel_rect_integral(double offset, double h, double hurst) {
  const KernelPrimitives kp(hurst);
  return kp.k2(offset + h) - 2.0 * kp.k2(offset) + kp.k2(offset - h);
}

double kernel_triangle_integral(double h, double hurst) {
  const KernelPrimitives kp(hurst);
  return kp.k2(h);
}

double h_inner_product(std::span<const double> phi, std::span<const double> psi,
                       double horizon, HurstParameter hurst) {
  if (phi.size() != psi.size())
    throw PreconditionError("h_inner_product: grid functions must share a grid");
  if (phi.size() < 2)
    throw PreconditionError("h_inner_product: need at least two grid nodes");
  if (horizon <= 0.0)
    throw PreconditionError("h_inner_product: horizon must be positive");

  const int n = static_cast<int>(phi.size()) - 1;
  const double h = horizon / n;
  const double inv_h = 1.0 / h;
  const double inv_h2 = inv_h * inv_h;

  // Per-lag bilinear node weights from the exact kernel cell moments.
  std::vector<double> w00(2 * n - 1), w01(2 * n - 1), w10(2 * n - 1), w11(2 * n - 1);
  for (int lag = -(n - 1); lag <= n - 1; ++lag) {
    const KernelCellMoments m = kernel_cell_moments(lag * h, h, hurst.value());
    const int idx = lag + n - 1;
    const double a11 = m.m11 * inv_h2;
    const double a10 = m.m10 * inv_h;
    const double a01 = m.m01 * inv_h;
    w00[idx] = m.m00 - a10 - a01 + a11;
    w10[idx] = a10 - a11;
    w01[idx] = a01 - a11;
    w11[idx] = a11;
  }

  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p0 = phi[i], p1 = phi[i + 1];
    for (int j = 0; j < n; ++j) {
      const int idx = i - j + n - 1;
      const double q0 = psi[j], q1 = psi[j + 1];
      acc += p0 * q0 * w00[idx] + p1 * q0 * w10[idx] + p0 * q1 * w01[idx] +
             p1 * q1 * w11[idx];
    }
  }
  const double alpha_h = hurst.value() * (2.0 * hurst.value() - 1.0);
  return alpha_h * acc;
}

NoiseBundle make_noise_bundle(const FbmSampler& sampler, int dim_fbm, int dim_bm,
                              int n, double horizon, int n_sub,
                              std::uint64_t seed, std::uint64_t path_index) {
  if (sampler.n() != n)
    throw PreconditionError("make_noise_bundle: sampler grid does not match n");
  if (n_sub < 1) throw PreconditionError("make_noise_bundle: n_sub must be >= 1");

  NoiseBundle nb;
  nb.n = n;
  nb.horizon = horizon;
  nb.n_sub = n_sub;
  nb.dim_fbm = dim_fbm;
  nb.dim_bm = dim_bm;
  nb.hurst = sampler.hurst_value();
  nb.seeds = {seed, path_index};

  nb.fbm_increments.resize(dim_fbm);
  for (int c = 0; c < dim_fbm; ++c) {
    GaussianCursor gauss(GaussianStream(
        seed, make_stream_id(path_index, stream_role::kFbmComponent + c)));
    nb.fbm_increments[c].resize(n);
    sampler.sample_increments(gauss, nb.fbm_increments[c]);
  }

  const double dt = horizon / n / n_sub;
  const double sdt = std::sqrt(dt);
  nb.fast_db.resize(static_cast<std::size_t>(n) * n_sub * dim_bm);
  for (int c = 0; c < dim_bm; ++c) {
    GaussianCursor gauss(GaussianStream(
        seed, make_stream_id(path_index, stream_role::kFastBrownian + c)));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * n_sub; ++i)
      nb.fast_db[i * dim_bm + c] = sdt * gauss.next();
  }
  return nb;
}

NoiseBundle coarsen_fast_noise(const NoiseBundle& fine, int n_sub) {
  if (n_sub < 1 || fine.n_sub % n_sub != 0)
    throw PreconditionError(
        "coarsen_fast_noise: coarse n_sub must divide the fine n_sub");
  NoiseBundle nb;
  nb.n = fine.n;
  nb.horizon = fine.horizon;
  nb.n_sub = n_sub;
  nb.dim_fbm = fine.dim_fbm;
  nb.dim_bm = fine.dim_bm;
  nb.hurst = fine.hurst;
  nb.seeds = fine.seeds;
  nb.fbm_increments = fine.fbm_increments;

  const int block = fine.n_sub / n_sub;
  const std::size_t coarse_steps = static_cast<std::size_t>(fine.n) * n_sub;
  nb.fast_db.assign(coarse_steps * fine.dim_bm, 0.0);
  for (std::size_t i = 0; i < coarse_steps; ++i)
    for (int b = 0; b < block; ++b)
      for (int c = 0; c < fine.dim_bm; ++c)
        nb.fast_db[i * fine.dim_bm + c] +=
            fine.fast_db[(i * block + b) * fine.dim_bm + c];
  return nb;
}

}  // namespace msfbm
