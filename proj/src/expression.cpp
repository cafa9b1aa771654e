#include "pmc/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace pmc {

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& s) : s_(s) {}

  Expression run() {
    Expression e;
    e.source_ = s_;
    out_ = &e;
    e.root_ = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected input");
    return e;
  }

 private:
  using Op = Expression::Node::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError(fmt::format("expression '{}': {} at column {}", s_, what, pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n) {
    out_->nodes_.push_back(std::move(n));
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int binary(Op op, int a, int b) { return add({op, 0.0, 0, {}, {a, b}}); }

  int expr() {
    int lhs = term();
    while (true) {
      if (accept('+'))
        lhs = binary(Op::Add, lhs, term());
      else if (accept('-'))
        lhs = binary(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  int term() {
    int lhs = unary();
    while (true) {
      if (accept('*'))
        lhs = binary(Op::Mul, lhs, unary());
      else if (accept('/'))
        lhs = binary(Op::Div, lhs, unary());
      else
        return lhs;
    }
  }

  int unary() {
    if (accept('-')) return add({Op::Neg, 0.0, 0, {}, {unary()}});
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = atom();
    if (accept('^')) return binary(Op::Pow, base, unary());
    return base;
  }

  int atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return add({Op::Const, v, 0, {}, {}});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (accept('(')) return call(name);
      if (name == "x1" || name == "x") return variable(0);
      if (name == "x2" || name == "y") return variable(1);
      if (name == "z") return variable(2);
      if (name == "pi") return add({Op::Const, std::numbers::pi, 0, {}, {}});
      if (name == "e") return add({Op::Const, std::numbers::e, 0, {}, {}});
      pos_ = start;
      fail(fmt::format("unknown name '{}'", name));
    }
    fail(fmt::format("unexpected '{}'", c));
  }

  int variable(int v) {
    if (v == 2)
      out_->uses_z_ = true;
    else
      out_->uses_x_ = true;
    return add({Op::Var, 0.0, v, {}, {}});
  }

  int call(const std::string& name) {
    static const std::vector<std::pair<std::string, int>> arity = {
        {"exp", 1}, {"log", 1}, {"sin", 1}, {"cos", 1}, {"tanh", 1},
        {"sqrt", 1}, {"abs", 1}, {"min", 2}, {"max", 2}};
    int want = -1;
    for (const auto& [n, k] : arity)
      if (n == name) want = k;
    if (want < 0) fail(fmt::format("unknown function '{}'", name));
    std::vector<int> args{expr()};
    while (accept(',')) args.push_back(expr());
    if (!accept(')')) fail("expected ')'");
    if (static_cast<int>(args.size()) != want) fail(fmt::format("{} takes {} argument(s)", name, want));
    return add({Op::Call, 0.0, 0, name, std::move(args)});
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
};

Expression Expression::parse(const std::string& source) { return ExpressionParser(source).run(); }

namespace {

// Forward-mode dual number in three directions.
struct Dual {
  double v = 0.0;
  std::array<double, 3> d{};
};

Dual scale_d(const Dual& a, double value, double slope) {
  Dual r{value, {}};
  for (int i = 0; i < 3; ++i) r.d[static_cast<std::size_t>(i)] = slope * a.d[static_cast<std::size_t>(i)];
  return r;
}

Dual eval_node(const std::vector<Expression::Node>& nodes, int id, const std::array<double, 3>& vars) {
  using Op = Expression::Node::Op;
  const auto& n = nodes[static_cast<std::size_t>(id)];
  auto arg = [&](std::size_t i) { return eval_node(nodes, n.args[i], vars); };
  switch (n.op) {
    case Op::Const:
      return {n.value, {}};
    case Op::Var: {
      Dual r{vars[static_cast<std::size_t>(n.var)], {}};
      r.d[static_cast<std::size_t>(n.var)] = 1.0;
      return r;
    }
    case Op::Neg: {
      const Dual a = arg(0);
      return scale_d(a, -a.v, -1.0);
    }
    case Op::Add:
    case Op::Sub: {
      const Dual a = arg(0), b = arg(1);
      const double s = n.op == Op::Add ? 1.0 : -1.0;
      Dual r{a.v + s * b.v, {}};
      for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] + s * b.d[i];
      return r;
    }
    case Op::Mul: {
      const Dual a = arg(0), b = arg(1);
      Dual r{a.v * b.v, {}};
      for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
      return r;
    }
    case Op::Div: {
      const Dual a = arg(0), b = arg(1);
      Dual r{a.v / b.v, {}};
      for (std::size_t i = 0; i < 3; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
      return r;
    }
    case Op::Pow: {
      const Dual a = arg(0), b = arg(1);
      const double value = std::pow(a.v, b.v);
      Dual r{value, {}};
      const bool const_exp = b.d[0] == 0.0 && b.d[1] == 0.0 && b.d[2] == 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        double di = 0.0;
        if (a.d[i] != 0.0) di += (b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1.0)) * a.d[i];
        if (!const_exp && b.d[i] != 0.0) di += value * std::log(a.v) * b.d[i];
        r.d[i] = di;
      }
      return r;
    }
    case Op::Call: {
      const Dual a = arg(0);
      if (n.fn == "exp") return scale_d(a, std::exp(a.v), std::exp(a.v));
      if (n.fn == "log") return scale_d(a, std::log(a.v), 1.0 / a.v);
      if (n.fn == "sin") return scale_d(a, std::sin(a.v), std::cos(a.v));
      if (n.fn == "cos") return scale_d(a, std::cos(a.v), -std::sin(a.v));
      if (n.fn == "tanh") {
        const double t = std::tanh(a.v);
        return scale_d(a, t, 1.0 - t * t);
      }
      if (n.fn == "sqrt") return scale_d(a, std::sqrt(a.v), 0.5 / std::sqrt(a.v));
      if (n.fn == "abs") return scale_d(a, std::abs(a.v), a.v < 0.0 ? -1.0 : 1.0);
      const Dual b = arg(1);
      if (n.fn == "min") return a.v <= b.v ? a : b;
      return a.v >= b.v ? a : b;
    }
  }
  return {};
}

}  // namespace

double Expression::operator()(double x1, double x2, double z) const {
  return eval_node(nodes_, root_, {x1, x2, z}).v;
}

ValueGrad Expression::eval_grad(double x1, double x2, double z) const {
  const Dual d = eval_node(nodes_, root_, {x1, x2, z});
  return {d.v, d.d};
}

}  // namespace pmc
