// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

namespace msfbm::cli {

// Arithmetic expressions over the variables x and y with + - * / ^,
// parentheses, numeric literals, and {sin, cos, exp, sqrt, abs, tanh}.
// ^ binds tighter than unary minus and associates to the right.
struct ExprNode;

class CoefficientExpr {
 public:
  static CoefficientExpr parse(const std::string& source);

  double eval(double x, double y) const;
  std::string format() const;
  bool equal_tree(const CoefficientExpr& other) const;
  const std::string& source() const { return source_; }
  bool uses_x() const;
  bool uses_y() const;

 private:
  std::string source_;
  std::shared_ptr<const ExprNode> root_;
};

// Thrown with the byte offset of the offending token.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t offset_)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset_) + ")"),
        offset(offset_) {}
  std::size_t offset;
};

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace msfbm::cli
