// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>

#include "msfbm/fbm.hpp"
#include "msfbm/model.hpp"

namespace msfbm {

// C^2 test function with the derivative callbacks the change-of-variables
// check needs.  All five must be set.
struct TestFunction {
  std::function<double(std::span<const double> x, std::span<const double> y)> value;
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<double>)>
      grad_x;  // dim_x
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<double>)>
      grad_y;  // dim_y
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<double>)>
      hess_x;  // dim_x * dim_x
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<double>)>
      hess_y;  // dim_y * dim_y
};

// |F(X_T,Y_T) - F(x0,y0) - discretized right side| of the fBm
// change-of-variables formula, which carries the eps*alpha_H double-time
// kernel term and the (2 eta)^{-1} hess_y : tau tau^T term.  The fBm
// stochastic sum is taken in the divergence sense: the left-point sum minus
// its discrete Malliavin trace (without that correction the alpha_H term has
// nothing to cancel and the residual cannot vanish under refinement).
double ito_residual(const ModelSpec& model, const TestFunction& test_fn,
                    const ScaleParams& scales, std::span<const double> x0,
                    std::span<const double> y0, int n, double horizon,
                    const NoiseBundle& noise);

}  // namespace msfbm
