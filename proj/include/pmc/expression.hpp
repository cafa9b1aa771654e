#pragma once

// Arithmetic expressions in the chart coordinates x1, x2 and the height z.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Names: x1, x2 (aliases x, y), z, pi, e. Functions: exp, log, sin, cos,
// tanh, sqrt, abs, min, max.

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmc {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Value and gradient with respect to (x1, x2, z).
struct ValueGrad {
  double value = 0.0;
  std::array<double, 3> grad{};
};

class Expression {
 public:
  static Expression parse(const std::string& source);

  const std::string& source() const { return source_; }
  double operator()(double x1, double x2, double z) const;
  ValueGrad eval_grad(double x1, double x2, double z) const;
  bool depends_on_z() const { return uses_z_; }
  bool depends_on_x() const { return uses_x_; }

  struct Node {
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call } op = Op::Const;
    double value = 0.0;
    int var = 0;
    std::string fn;
    std::vector<int> args;
  };

 private:
  std::string source_;
  std::vector<Node> nodes_;
  int root_ = -1;
  bool uses_z_ = false;
  bool uses_x_ = false;
  friend class ExpressionParser;
};

}  // namespace pmc
