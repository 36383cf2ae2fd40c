#include "anisoac/expr.hpp"

#include <cctype>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <vector>

#include "anisoac/errors.hpp"

namespace anisoac {

struct Expr::Node {
  enum class Op { num, x1, x2, u, add, sub, mul, div, pow, neg, sin, cos, exp, log, sqrt };
  Op op = Op::num;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x1, double x2, double u) const {
    switch (op) {
      case Op::num: return value;
      case Op::x1: return x1;
      case Op::x2: return x2;
      case Op::u: return u;
      case Op::add: return lhs->eval(x1, x2, u) + rhs->eval(x1, x2, u);
      case Op::sub: return lhs->eval(x1, x2, u) - rhs->eval(x1, x2, u);
      case Op::mul: return lhs->eval(x1, x2, u) * rhs->eval(x1, x2, u);
      case Op::div: return lhs->eval(x1, x2, u) / rhs->eval(x1, x2, u);
      case Op::pow: return std::pow(lhs->eval(x1, x2, u), rhs->eval(x1, x2, u));
      case Op::neg: return -lhs->eval(x1, x2, u);
      case Op::sin: return std::sin(lhs->eval(x1, x2, u));
      case Op::cos: return std::cos(lhs->eval(x1, x2, u));
      case Op::exp: return std::exp(lhs->eval(x1, x2, u));
      case Op::log: return std::log(lhs->eval(x1, x2, u));
      case Op::sqrt: return std::sqrt(lhs->eval(x1, x2, u));
    }
    return 0.0;
  }
  bool depends_on_vars() const {
    if (op == Op::x1 || op == Op::x2 || op == Op::u) return true;
    return (lhs && lhs->depends_on_vars()) || (rhs && rhs->depends_on_vars());
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    auto n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static NodePtr make(Expr::Node::Op op, NodePtr l = nullptr, NodePtr r = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    n->value = v;
    return n;
  }

  NodePtr sum() {
    auto n = product();
    for (;;) {
      if (eat('+')) n = make(Expr::Node::Op::add, n, product());
      else if (eat('-')) n = make(Expr::Node::Op::sub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    auto n = unary();
    for (;;) {
      if (eat('*')) n = make(Expr::Node::Op::mul, n, unary());
      else if (eat('/')) n = make(Expr::Node::Op::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Expr::Node::Op::neg, unary());
    if (eat('+')) return unary();
    auto base = primary();
    if (eat('^')) return make(Expr::Node::Op::pow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      auto n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return make(Expr::Node::Op::num, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "x1") return make(Expr::Node::Op::x1);
      if (id == "x2") return make(Expr::Node::Op::x2);
      if (id == "u") return make(Expr::Node::Op::u);
      if (id == "pi") return make(Expr::Node::Op::num, nullptr, nullptr, std::numbers::pi);
      static const std::pair<const char*, Expr::Node::Op> funcs[] = {
          {"sin", Expr::Node::Op::sin}, {"cos", Expr::Node::Op::cos}, {"exp", Expr::Node::Op::exp},
          {"log", Expr::Node::Op::log}, {"sqrt", Expr::Node::Op::sqrt}};
      for (auto& [name, op] : funcs) {
        if (id == name) {
          if (!eat('(')) fail("expected '(' after " + id);
          auto arg = sum();
          if (!eat(')')) fail("missing ')'");
          return make(op, arg);
        }
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected character");
  }
};

}  // namespace

Expr::Expr() {
  auto n = std::make_shared<Node>();
  n->value = 1.0;
  root_ = n;
  text_ = "1";
}

Expr Expr::parse(const std::string& text) {
  Expr e;
  e.root_ = Parser(text).run();
  e.text_ = text;
  return e;
}

Expr Expr::constant(double c) {
  Expr e;
  auto n = std::make_shared<Node>();
  n->value = c;
  e.root_ = n;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  e.text_ = buf;
  return e;
}

double Expr::operator()(double x1, double x2, double u) const { return root_->eval(x1, x2, u); }

bool Expr::is_constant() const { return !root_->depends_on_vars(); }

}  // namespace anisoac
