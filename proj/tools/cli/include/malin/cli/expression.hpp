#pragma once

#include "malin/types.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace malin::cli {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closed-form coefficient expressions over x1..xn (aliases x, y, z):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary ('*' unary | '/' number)*
//   unary  := '-' unary | factor
//   factor := number | 'pi' | variable | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
//
// Products of constants, coordinates and sinusoids; division only by
// literal numbers. Every expression carries its exact gradient.
class Expression {
 public:
  struct Node;

  static Expression parse(const std::string& text, int dimension);
  static Expression constant(double value, int dimension);

  double operator()(const Vector& x) const;
  // d/dx_i
  double derivative(const Vector& x, int i) const;
  const std::string& text() const { return text_; }
  int dimension() const { return dimension_; }
  bool is_constant() const;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  int dimension_ = 0;
};

}  // namespace malin::cli
