#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>

namespace anisoac {

// Compiled arithmetic expression over x1, x2 (and optionally u).
// Grammar: + - * / ^, unary minus, parentheses, numbers, pi,
// sin cos exp log sqrt.
class Expr {
 public:
  Expr();  // constant 1
  static Expr parse(const std::string& text);
  static Expr constant(double c);

  double operator()(double x1, double x2, double u = 0.0) const;
  double operator()(const Eigen::Vector2d& x) const { return (*this)(x[0], x[1]); }

  const std::string& text() const { return text_; }
  bool is_constant() const;

  struct Node;  // parse tree, opaque outside expr.cpp

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace anisoac
