// SPDX-License-Identifier: Apache-2.0
#include "msfbm/conditions.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "msfbm/errors.hpp"

namespace msfbm {

namespace {

constexpr double kEigenFloor = 1e-10;

// Deterministic low-discrepancy probe points (additive golden-ratio lattice).
std::vector<double> probe_point(std::span<const double> lo,
                                std::span<const double> hi, int index, int dim) {
  static const double alphas[] = {0.6180339887498949, 0.7548776662466927,
                                  0.8191725133961645, 0.8566748838545029,
                                  0.8812714616335696, 0.8986537126286993};
  std::vector<double> p(dim);
  for (int d = 0; d < dim; ++d) {
    const double a = alphas[d % 6];
    double frac = std::fmod((index + 1) * a, 1.0);
    p[d] = lo[d] + frac * (hi[d] - lo[d]);
  }
  return p;
}

double min_eig_sym(const std::vector<double>& a, int dim) {
  Eigen::MatrixXd mat(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      mat(i, j) = a[static_cast<std::size_t>(i) * dim + j];
  Eigen::MatrixXd sym = mat * mat.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvalues().minCoeff();
}

double frobenius_sq(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

}  // namespace

double recurrence_margin(const ModelSpec& model, std::span<const double> y,
                         double sup_tau_sq, double lambda_g) {
  const int dy = model.dim_y;
  std::vector<double> fy(dy), gy(dy);
  model.f(y, fy);
  if (lambda_g != 0.0 && model.has_g()) {
    model.g(y, gy);
    for (int i = 0; i < dy; ++i) fy[i] += lambda_g * gy[i];
  }
  double ydotf = 0.0, ynorm = 0.0;
  for (int i = 0; i < dy; ++i) {
    ydotf += y[i] * fy[i];
    ynorm += y[i] * y[i];
  }
  ynorm = std::sqrt(ynorm);
  const GrowthMeta& meta = model.meta;
  return ydotf + meta.alpha * std::pow(ynorm, meta.beta) +
         0.5 * (meta.beta - 2.0 + dy) * sup_tau_sq;
}

ConditionReport check_conditions(const ModelSpec& model, const ProbeBox& box,
                                 int n_probe) {
  if (static_cast<int>(box.x_lo.size()) != model.dim_x ||
      static_cast<int>(box.y_lo.size()) != model.dim_y)
    throw PreconditionError("check_conditions: box dimensions do not match model");
  if (n_probe < 8) n_probe = 8;

  ConditionReport report;
  const int m = model.dim_x;
  const int dy = model.dim_y;
  const GrowthMeta& meta = model.meta;

  // growth of c against the declared envelope
  {
    ConditionEntry e;
    e.name = "growth_c";
    double worst = 0.0;
    std::vector<double> worst_pt;
    std::vector<double> cx(m);
    for (int i = 0; i < n_probe; ++i) {
      auto px = probe_point(box.x_lo, box.x_hi, i, m);
      auto py = probe_point(box.y_lo, box.y_hi, 7919 - i, dy);
      model.c(px, py, cx);
      double cn = 0.0, xn = 0.0, yn = 0.0;
      for (double v : cx) cn += v * v;
      for (double v : px) xn += v * v;
      for (double v : py) yn += v * v;
      cn = std::sqrt(cn);
      const double bound = meta.growth_k *
                           (1.0 + std::pow(std::sqrt(xn), meta.growth_r)) *
                           (1.0 + std::pow(std::sqrt(yn), meta.growth_q));
      const double ratio = cn / bound;
      if (ratio > worst) {
        worst = ratio;
        worst_pt = px;
        worst_pt.insert(worst_pt.end(), py.begin(), py.end());
      }
    }
    e.margin = worst - 1.0;
    e.pass = worst <= 1.0;
    e.witness = worst_pt;
    e.detail = "max |c| / envelope = " + std::to_string(worst);
    report.entries.push_back(std::move(e));
  }

  // sigma sigma^T nondegenerate
  {
    ConditionEntry e;
    e.name = "nondegenerate_sigma";
    double min_eig = 1e300;
    std::vector<double> worst_pt;
    std::vector<double> sig(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < n_probe; ++i) {
      auto py = probe_point(box.y_lo, box.y_hi, i, dy);
      model.sigma(py, sig);
      const double ev = min_eig_sym(sig, m);
      if (ev < min_eig) {
        min_eig = ev;
        worst_pt = py;
      }
    }
    e.margin = min_eig - kEigenFloor;
    e.pass = min_eig >= kEigenFloor;
    e.witness = worst_pt;
    e.detail = "min eig(sigma sigma^T) = " + std::to_string(min_eig);
    report.entries.push_back(std::move(e));
  }

  // tau tau^T bounded (against the declared sup) and nondegenerate
  double probed_sup_tau_sq = 0.0;
  {
    ConditionEntry e;
    e.name = "bounded_nondegenerate_tau";
    double min_eig = 1e300, max_frob = 0.0;
    std::vector<double> worst_pt;
    std::vector<double> ty(static_cast<std::size_t>(dy) * dy);
    for (int i = 0; i < n_probe; ++i) {
      auto py = probe_point(box.y_lo, box.y_hi, i, dy);
      model.tau(py, ty);
      const double ev = min_eig_sym(ty, dy);
      const double fr = frobenius_sq(ty);
      max_frob = std::max(max_frob, fr);
      if (ev < min_eig) {
        min_eig = ev;
        worst_pt = py;
      }
    }
    probed_sup_tau_sq = max_frob;
    const bool nondeg = min_eig >= kEigenFloor;
    const bool bounded = max_frob <= meta.sup_tau_sq * (1.0 + 1e-9);
    e.margin = nondeg ? (meta.sup_tau_sq - max_frob) : (min_eig - kEigenFloor);
    e.pass = nondeg && bounded;
    e.witness = worst_pt;
    e.detail = "min eig(tau tau^T) = " + std::to_string(min_eig) +
               ", max |tau|^2 = " + std::to_string(max_frob) +
               " (declared " + std::to_string(meta.sup_tau_sq) + ")";
    report.entries.push_back(std::move(e));
  }

  // recurrence on the outer shell of the y-box
  {
    ConditionEntry e;
    e.name = "recurrence";
    double worst = -1e300;
    std::vector<double> worst_pt;
    int used = 0;
    for (int i = 0; i < 4 * n_probe && used < n_probe; ++i) {
      auto py = probe_point(box.y_lo, box.y_hi, i, dy);
      // keep only shell points: some coordinate within the outer 20%
      bool shell = false;
      for (int d = 0; d < dy; ++d) {
        const double rel = (py[d] - box.y_lo[d]) / (box.y_hi[d] - box.y_lo[d]);
        if (rel <= 0.1 || rel >= 0.9) shell = true;
      }
      if (!shell) continue;
      ++used;
      const double margin = recurrence_margin(model, py, probed_sup_tau_sq);
      if (margin > worst) {
        worst = margin;
        worst_pt = py;
      }
    }
    e.margin = worst;
    e.pass = worst <= 0.0;
    e.witness = worst_pt;
    e.detail = "max shell margin = " + std::to_string(worst) +
               " (alpha=" + std::to_string(meta.alpha) +
               ", beta=" + std::to_string(meta.beta) + ")";
    report.entries.push_back(std::move(e));
  }

  report.all_pass = true;
  for (const auto& e : report.entries) report.all_pass &= e.pass;
  return report;
}

std::string ConditionReport::format() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << (e.pass ? "[pass] " : "[FAIL] ") << e.name << ": " << e.detail;
    if (!e.witness.empty()) {
      os << " witness=(";
      for (std::size_t i = 0; i < e.witness.size(); ++i) {
        if (i) os << ", ";
        os << e.witness[i];
      }
      os << ")";
    }
    os << "\n";
  }
  os << (all_pass ? "all conditions pass" : "some conditions FAILED") << "\n";
  return os.str();
}

const ConditionEntry* ConditionReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace msfbm
