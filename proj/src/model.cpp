// SPDX-License-Identifier: Apache-2.0
#include "msfbm/model.hpp"

#include <cmath>

#include "msfbm/errors.hpp"

namespace msfbm {

ScaleParams::ScaleParams(double eps_, double eta_, double lambda_, double kappa_)
    : eps(eps_), eta(eta_), lambda(lambda_), kappa(kappa_) {
  if (eps <= 0.0)
    throw PreconditionError("ScaleParams: eps must be positive (use formal_limit for eps = 0)");
  if (eta <= 0.0) throw PreconditionError("ScaleParams: eta must be positive");
  if (lambda < 0.0) throw PreconditionError("ScaleParams: lambda must be nonnegative");
}

ScaleParams ScaleParams::formal_limit(double eta_) {
  ScaleParams s(1.0, eta_);
  s.eps = 0.0;
  s.formal_zero_noise = true;
  return s;
}

double ScaleParams::noise_amplitude() const {
  return formal_zero_noise ? 0.0 : std::sqrt(eps);
}

namespace {

ModelSpec ou_quadratic_base(bool state_dependent_sigma) {
  ModelSpec m;
  m.dim_x = 1;
  m.dim_y = 1;
  m.c = [](std::span<const double> x, std::span<const double> y,
           std::span<double> out) { out[0] = -x[0] + y[0] * y[0]; };
  if (state_dependent_sigma) {
    m.sigma = [](std::span<const double> y, std::span<double> out) {
      out[0] = std::sqrt(1.0 + y[0] * y[0]);
    };
  } else {
    m.sigma = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  }
  m.f = [](std::span<const double> y, std::span<double> out) { out[0] = -y[0]; };
  m.tau = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };

  m.meta.growth_k = 2.0;
  m.meta.growth_q = 2.0;
  m.meta.growth_r = 0.5;
  m.meta.alpha = 0.9;
  m.meta.beta = 2.0;
  m.meta.gamma = 0.0;
  m.meta.bounded_grad_x_c = true;  // grad_x c == -1
  m.meta.sup_tau_sq = 1.0;
  m.meta.relax_time = 1.0;
  return m;
}

void add_extension(ModelSpec& m) {
  // b is centered under the OU invariant measure N(0, 1/2); g damps the
  // limiting fast drift to f + lambda*g = -(1+lambda) y.
  m.b = [](std::span<const double>, std::span<const double> y,
           std::span<double> out) { out[0] = y[0]; };
  m.g = [](std::span<const double> y, std::span<double> out) { out[0] = -y[0]; };
}

}  // namespace

ModelSpec make_registry_model(const std::string& name) {
  if (name == "ou-quadratic") {
    ModelSpec m = ou_quadratic_base(false);
    m.name = name;
    return m;
  }
  if (name == "ou-quadratic-sigma") {
    ModelSpec m = ou_quadratic_base(true);
    m.name = name;
    return m;
  }
  if (name == "ou-quadratic-ext") {
    ModelSpec m = ou_quadratic_base(false);
    add_extension(m);
    m.name = name;
    return m;
  }
  if (name == "ou-quadratic-sigma-ext") {
    ModelSpec m = ou_quadratic_base(true);
    add_extension(m);
    m.name = name;
    return m;
  }
  std::string names;
  for (const auto& s : registry_model_names()) names += " " + s;
  throw ConfigError("unknown model '" + name + "'; registry has:" + names);
}

std::vector<std::string> registry_model_names() {
  return {"ou-quadratic", "ou-quadratic-sigma", "ou-quadratic-ext",
          "ou-quadratic-sigma-ext"};
}

}  // namespace msfbm
