#include "wprobe/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "wprobe/errors.hpp"

namespace wprobe {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression run() {
    Expression e;
    e.nodes_.clear();
    out_ = &e;
    const int root = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    e.root_ = root;
    e.text_ = std::string(trim(text_));
    for (const auto& n : e.nodes_) {
      if (n.op == Expression::Op::Var) e.depends_on_x_ = true;
    }
    return e;
  }

 private:
  using Op = Expression::Op;

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  }

  [[noreturn]] void fail(const char* what) const {
    throw ConfigError("symbols: coefficient expression '" + std::string(text_) + "': " + what +
                      " at position " + std::to_string(pos_));
  }

  int add(Op op, double value = 0.0, int lhs = -1, int rhs = -1) {
    out_->nodes_.push_back({op, value, lhs, rhs});
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = add(Op::Add, 0.0, lhs, parse_term());
      } else if (accept('-')) {
        lhs = add(Op::Sub, 0.0, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = add(Op::Mul, 0.0, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = add(Op::Div, 0.0, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return add(Op::Neg, 0.0, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_atom();
    if (accept('^')) return add(Op::Pow, 0.0, base, parse_unary());
    return base;
  }

  int parse_atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double value = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      if (!std::isfinite(value)) fail("number out of range");
      return add(Op::Const, value);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "x") return add(Op::Var);
      if (name == "pi") return add(Op::Const, std::numbers::pi);
      Op fn;
      if (name == "sin") {
        fn = Op::Sin;
      } else if (name == "cos") {
        fn = Op::Cos;
      } else if (name == "exp") {
        fn = Op::Exp;
      } else {
        pos_ = start;
        fail("unknown identifier");
      }
      if (!accept('(')) fail("expected '(' after function name");
      const int arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return add(fn, 0.0, arg);
    }
    fail("unexpected character");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
};

Expression::Expression() : nodes_{{Op::Const, 0.0, -1, -1}}, text_("0") {}

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

Expression Expression::constant(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return parse(buf);
}

double Expression::operator()(double x) const { return eval(root_, x); }

double Expression::eval(int node, double x) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var:
      return x;
    case Op::Add:
      return eval(n.lhs, x) + eval(n.rhs, x);
    case Op::Sub:
      return eval(n.lhs, x) - eval(n.rhs, x);
    case Op::Mul:
      return eval(n.lhs, x) * eval(n.rhs, x);
    case Op::Div:
      return eval(n.lhs, x) / eval(n.rhs, x);
    case Op::Pow:
      return std::pow(eval(n.lhs, x), eval(n.rhs, x));
    case Op::Neg:
      return -eval(n.lhs, x);
    case Op::Sin:
      return std::sin(eval(n.lhs, x));
    case Op::Cos:
      return std::cos(eval(n.lhs, x));
    case Op::Exp:
      return std::exp(eval(n.lhs, x));
  }
  return 0.0;
}

}  // namespace wprobe
