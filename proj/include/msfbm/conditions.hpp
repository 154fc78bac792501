// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "msfbm/model.hpp"

namespace msfbm {

struct ConditionEntry {
  std::string name;
  bool pass = false;
  double margin = 0.0;           // signed; <= 0 means satisfied for recurrence
  std::vector<double> witness;   // worst probe point
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;
  bool all_pass = false;
  std::string format() const;
  const ConditionEntry* find(const std::string& name) const;
};

struct ProbeBox {
  std::vector<double> x_lo, x_hi;  // dim_x
  std::vector<double> y_lo, y_hi;  // dim_y
};

// Numerically probes the growth bound on c, the nondegeneracy of sigma
// sigma^T, boundedness + nondegeneracy of tau tau^T, and the recurrence
// inequality y.f + alpha|y|^beta + (beta-2+d-m)/2 sup|tau|^2 <= 0 on the
// outer shell of the box.  Failures are reported, never thrown.
ConditionReport check_conditions(const ModelSpec& model, const ProbeBox& box,
                                 int n_probe);

// Pointwise recurrence margin at y (shifted drift for the extended model).
double recurrence_margin(const ModelSpec& model, std::span<const double> y,
                         double sup_tau_sq, double lambda_g = 0.0);

}  // namespace msfbm
