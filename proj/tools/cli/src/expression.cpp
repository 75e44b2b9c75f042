#include "malin/cli/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace malin::cli {

struct Expression::Node {
  enum class Op { Constant, Variable, Add, Sub, Mul, Neg, Sin, Cos };
  Op op = Op::Constant;
  double value = 0.0;
  int index = 0;
  std::shared_ptr<const Node> a, b;

  double eval(const Vector& x) const {
    switch (op) {
      case Op::Constant: return value;
      case Op::Variable: return x[index];
      case Op::Add: return a->eval(x) + b->eval(x);
      case Op::Sub: return a->eval(x) - b->eval(x);
      case Op::Mul: return a->eval(x) * b->eval(x);
      case Op::Neg: return -a->eval(x);
      case Op::Sin: return std::sin(a->eval(x));
      case Op::Cos: return std::cos(a->eval(x));
    }
    return 0.0;
  }

  double diff(const Vector& x, int i) const {
    switch (op) {
      case Op::Constant: return 0.0;
      case Op::Variable: return index == i ? 1.0 : 0.0;
      case Op::Add: return a->diff(x, i) + b->diff(x, i);
      case Op::Sub: return a->diff(x, i) - b->diff(x, i);
      case Op::Mul: return a->diff(x, i) * b->eval(x) + a->eval(x) * b->diff(x, i);
      case Op::Neg: return -a->diff(x, i);
      case Op::Sin: return std::cos(a->eval(x)) * a->diff(x, i);
      case Op::Cos: return -std::sin(a->eval(x)) * a->diff(x, i);
    }
    return 0.0;
  }

  bool constant() const {
    switch (op) {
      case Op::Constant: return true;
      case Op::Variable: return false;
      default: return a->constant() && (!b || b->constant());
    }
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, int n) : s_(text), n_(n) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << what << " at offset " << pos_ << " in \"" << s_ << "\"";
    throw ExpressionError(os.str());
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

  NodePtr expr() {
    NodePtr left = term();
    for (;;) {
      if (accept('+')) left = make(Op::Add, left, term());
      else if (accept('-')) left = make(Op::Sub, left, term());
      else return left;
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    for (;;) {
      if (accept('*')) {
        left = make(Op::Mul, left, unary());
      } else if (accept('/')) {
        skip();
        const double d = literal();
        if (d == 0.0) fail("division by zero");
        left = make(Op::Mul, left, number(1.0 / d));
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return factor();
  }

  double literal() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  NodePtr factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(literal());
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
    std::size_t end = pos_;
    while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
    const std::string word = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (word == "pi") return number(std::numbers::pi);
    if (word == "sin" || word == "cos") {
      if (!accept('(')) fail("expected '(' after " + word);
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return make(word == "sin" ? Op::Sin : Op::Cos, e);
    }
    int index = -1;
    if (word == "x") index = 0;
    else if (word == "y") index = 1;
    else if (word == "z") index = 2;
    else if (word.size() == 2 && word[0] == 'x' && word[1] >= '1' && word[1] <= '9') index = word[1] - '1';
    if (index < 0) fail("unknown identifier '" + word + "'");
    if (index >= n_) fail("variable '" + word + "' exceeds the dimension");
    auto v = std::make_shared<Expression::Node>();
    v->op = Op::Variable;
    v->index = index;
    return v;
  }

  const std::string& s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, int dimension) {
  Expression e;
  e.root_ = Parser(text, dimension).parse();
  e.text_ = text;
  e.dimension_ = dimension;
  return e;
}

Expression Expression::constant(double value, int dimension) {
  Expression e;
  e.root_ = number(value);
  std::ostringstream os;
  os.precision(17);
  os << value;
  e.text_ = os.str();
  e.dimension_ = dimension;
  return e;
}

double Expression::operator()(const Vector& x) const { return root_->eval(x); }
double Expression::derivative(const Vector& x, int i) const { return root_->diff(x, i); }
bool Expression::is_constant() const { return root_->constant(); }

}  // namespace malin::cli
