#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wprobe {

/// A real function of one variable `x` from a small grammar:
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | 'x' | 'pi' | fn '(' expr ')' | '(' expr ')'
///   fn     := 'sin' | 'cos' | 'exp'
///
/// Parsed once into a flat node array and evaluated without allocation.
class Expression {
 public:
  Expression();  // the constant 0
  /// Throws ConfigError with the offending position on a syntax error.
  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double operator()(double x) const;
  bool depends_on_x() const { return depends_on_x_; }
  /// Source text as given to parse(); re-parsing it yields the same function.
  const std::string& text() const { return text_; }

  friend bool operator==(const Expression& a, const Expression& b) { return a.text_ == b.text_; }

 private:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
  struct Node {
    Op op;
    double value;
    int lhs;
    int rhs;
  };
  friend class ExpressionParser;

  double eval(int node, double x) const;

  std::vector<Node> nodes_;
  int root_ = 0;
  bool depends_on_x_ = false;
  std::string text_;
};

}  // namespace wprobe
