// SPDX-License-Identifier: Apache-2.0
#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace msfbm::cli {

enum class NodeKind { Number, Variable, Unary, Binary, Call };

struct ExprNode {
  NodeKind kind;
  double number = 0.0;
  char variable = 'x';
  char op = '+';  // binary op, or '-' for unary
  std::string fn;
  std::shared_ptr<const ExprNode> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Number;
  n->number = v;
  return n;
}
NodePtr make_variable(char v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Variable;
  n->variable = v;
  return n;
}
NodePtr make_unary(NodePtr operand) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Unary;
  n->op = '-';
  n->lhs = std::move(operand);
  return n;
}
NodePtr make_binary(char op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
NodePtr make_call(std::string fn, NodePtr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->fn = std::move(fn);
  n->lhs = std::move(arg);
  return n;
}

bool known_function(const std::string& name) {
  return name == "sin" || name == "cos" || name == "exp" || name == "sqrt" ||
         name == "abs" || name == "tanh";
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool consume(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (consume('+'))
        lhs = make_binary('+', lhs, parse_term());
      else if (consume('-'))
        lhs = make_binary('-', lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (consume('*'))
        lhs = make_binary('*', lhs, parse_factor());
      else if (consume('/'))
        lhs = make_binary('/', lhs, parse_factor());
      else
        return lhs;
    }
  }

  // factor := '-' factor | power ;  power := atom ('^' factor)?
  NodePtr parse_factor() {
    if (consume('-')) return make_unary(parse_factor());
    NodePtr base = parse_atom();
    if (consume('^')) return make_binary('^', base, parse_factor());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("bad numeric literal", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      return make_number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             std::isalnum(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x" || name == "y") return make_variable(name[0]);
      if (known_function(name)) {
        if (!consume('(')) throw ParseError("expected '(' after " + name, pos_);
        NodePtr arg = parse_sum();
        if (!consume(')')) throw ParseError("expected ')'", pos_);
        return make_call(name, arg);
      }
      throw ParseError("unknown identifier '" + name + "'", start);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval_node(const ExprNode& n, double x, double y) {
  switch (n.kind) {
    case NodeKind::Number:
      return n.number;
    case NodeKind::Variable:
      return n.variable == 'x' ? x : y;
    case NodeKind::Unary:
      return -eval_node(*n.lhs, x, y);
    case NodeKind::Call: {
      const double a = eval_node(*n.lhs, x, y);
      if (n.fn == "sin") return std::sin(a);
      if (n.fn == "cos") return std::cos(a);
      if (n.fn == "exp") return std::exp(a);
      if (n.fn == "tanh") return std::tanh(a);
      if (n.fn == "abs") return std::abs(a);
      if (a < 0.0) throw EvalError("sqrt of a negative value");
      return std::sqrt(a);
    }
    case NodeKind::Binary: {
      const double a = eval_node(*n.lhs, x, y);
      const double b = eval_node(*n.rhs, x, y);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
          if (b == 0.0) throw EvalError("division by zero");
          return a / b;
        default: {  // '^'
          if (a < 0.0 && b != std::floor(b))
            throw EvalError("fractional power of a negative base");
          return std::pow(a, b);
        }
      }
    }
  }
  return 0.0;
}

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Variable:
    case NodeKind::Call:
      return 4;
    case NodeKind::Unary:
      return 2;
    case NodeKind::Binary:
      return n.op == '^' ? 3 : (n.op == '*' || n.op == '/' ? 1 : 0);
  }
  return 4;
}

void format_node(const ExprNode& n, std::string& out) {
  auto wrap = [&](const ExprNode& child, bool need) {
    if (need) out += "(";
    format_node(child, out);
    if (need) out += ")";
  };
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[32];
      snprintf(buf, sizeof(buf), "%.17g", n.number);
      out += buf;
      return;
    }
    case NodeKind::Variable:
      out += n.variable;
      return;
    case NodeKind::Unary:
      out += "-";
      wrap(*n.lhs, precedence(*n.lhs) < 2);
      return;
    case NodeKind::Call:
      out += n.fn;
      out += "(";
      format_node(*n.lhs, out);
      out += ")";
      return;
    case NodeKind::Binary: {
      const int p = precedence(n);
      // left operand needs parens when strictly looser; for the
      // right-associative '^' the left operand must also be wrapped at equal
      // precedence, and for '-'/'/' the right operand at equal precedence
      const bool left_paren = precedence(*n.lhs) < p ||
                              (n.op == '^' && precedence(*n.lhs) == p);
      const bool right_assoc_safe = (n.op == '+' || n.op == '*');
      const bool right_paren =
          precedence(*n.rhs) < p ||
          (!right_assoc_safe && n.op != '^' && precedence(*n.rhs) == p);
      wrap(*n.lhs, left_paren);
      out += n.op;
      wrap(*n.rhs, right_paren);
      return;
    }
  }
}

bool equal_nodes(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number:
      return a.number == b.number;
    case NodeKind::Variable:
      return a.variable == b.variable;
    case NodeKind::Unary:
      return equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Call:
      return a.fn == b.fn && equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Binary:
      return a.op == b.op && equal_nodes(*a.lhs, *b.lhs) &&
             equal_nodes(*a.rhs, *b.rhs);
  }
  return false;
}

bool uses_var(const ExprNode& n, char v) {
  switch (n.kind) {
    case NodeKind::Number:
      return false;
    case NodeKind::Variable:
      return n.variable == v;
    case NodeKind::Unary:
    case NodeKind::Call:
      return uses_var(*n.lhs, v);
    case NodeKind::Binary:
      return uses_var(*n.lhs, v) || uses_var(*n.rhs, v);
  }
  return false;
}

}  // namespace

CoefficientExpr CoefficientExpr::parse(const std::string& source) {
  Parser p(source);
  CoefficientExpr e;
  e.source_ = source;
  e.root_ = p.parse();
  return e;
}

double CoefficientExpr::eval(double x, double y) const {
  return eval_node(*root_, x, y);
}

std::string CoefficientExpr::format() const {
  std::string out;
  format_node(*root_, out);
  return out;
}

bool CoefficientExpr::equal_tree(const CoefficientExpr& other) const {
  return equal_nodes(*root_, *other.root_);
}

bool CoefficientExpr::uses_x() const { return uses_var(*root_, 'x'); }
bool CoefficientExpr::uses_y() const { return uses_var(*root_, 'y'); }

}  // namespace msfbm::cli
