// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace msfbm {

// Counter-based random numbers (Philox 4x32-10).  A draw is a pure function
// of (seed, stream, counter), so ensembles are reproducible regardless of
// how paths are scheduled across threads.  Streams are cheap: every
// (path, role) pair gets its own.

namespace detail {

struct Philox4x32 {
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static inline void mulhilo(std::uint32_t a, std::uint32_t b,
                             std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(kM0, ctr[0], hi0, lo0);
      mulhilo(kM1, ctr[2], hi1, lo1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

inline double u64_to_open_unit(std::uint64_t x) {
  // (0,1), never exactly 0 or 1; 53-bit resolution shifted by half an ulp.
  return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

}  // namespace detail

// One logical stream of i.i.d. N(0,1) variates, indexed from 0.
// normal(i) is O(1); a pair of variates is derived from one Philox block
// via Box-Muller, so indices 2k and 2k+1 share a block.
class GaussianStream {
 public:
  GaussianStream() = default;
  GaussianStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  double normal(std::uint64_t index) const {
    const std::uint64_t pair = index >> 1;
    double z0, z1;
    normal_pair(pair, z0, z1);
    return (index & 1u) ? z1 : z0;
  }

  void normal_pair(std::uint64_t pair_index, double& z0, double& z1) const {
    const auto out = detail::Philox4x32::block(
        {static_cast<std::uint32_t>(pair_index),
         static_cast<std::uint32_t>(pair_index >> 32),
         static_cast<std::uint32_t>(stream_),
         static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_),
         static_cast<std::uint32_t>(seed_ >> 32)});
    const std::uint64_t a =
        (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    const std::uint64_t b =
        (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    const double u1 = detail::u64_to_open_unit(a);
    const double u2 = detail::u64_to_open_unit(b);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(phi);
    z1 = r * std::sin(phi);
  }

  double uniform(std::uint64_t index) const {
    const auto out = detail::Philox4x32::block(
        {static_cast<std::uint32_t>(index),
         static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(stream_ ^ 0x5D5C0A5Bu),
         static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_),
         static_cast<std::uint32_t>(seed_ >> 32)});
    return detail::u64_to_open_unit(
        (static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

// Sequential cursor over a GaussianStream; caches the Box-Muller pair so hot
// loops cost one Philox block per two draws.  next() returns normal(0),
// normal(1), ... in order.
class GaussianCursor {
 public:
  explicit GaussianCursor(GaussianStream s) : s_(s) {}

  double next() {
    const std::uint64_t pair = index_ >> 1;
    if (pair != cached_pair_) {
      s_.normal_pair(pair, z0_, z1_);
      cached_pair_ = pair;
    }
    return (index_++ & 1u) ? z1_ : z0_;
  }

  // Jump so the next draw is normal(index).
  void seek(std::uint64_t index) { index_ = index; }

 private:
  GaussianStream s_;
  std::uint64_t index_ = 0;
  std::uint64_t cached_pair_ = ~std::uint64_t{0};
  double z0_ = 0.0, z1_ = 0.0;
};

// Stream-id layout: one 64-bit stream per (path, role).  Roles keep the fBm
// driver, the fast Brownian driver, and auxiliary noises on disjoint streams.
namespace stream_role {
inline constexpr std::uint64_t kFbmComponent = 0x00;   // + component index
inline constexpr std::uint64_t kFastBrownian = 0x40;   // + component index
inline constexpr std::uint64_t kLimitFbm = 0x80;       // + component index
inline constexpr std::uint64_t kLimitBrownian = 0xA0;  // + component index
inline constexpr std::uint64_t kAux = 0xC0;
}  // namespace stream_role

inline std::uint64_t make_stream_id(std::uint64_t path_index,
                                    std::uint64_t role) {
  return (path_index << 8) | (role & 0xFFu);
}

struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

}  // namespace msfbm
