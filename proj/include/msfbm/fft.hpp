// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace msfbm {

// In-place radix-2 complex FFT (power-of-two lengths).  Enough for the
// circulant-embedding sampler, which controls its own transform sizes.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

}  // namespace msfbm
