// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "memflow/error.hpp"

namespace memflow
{

struct Expression::Node
{
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x) const
  {
    switch (kind)
    {
    case Kind::Number: return value;
    case Kind::Variable: return x;
    case Kind::Neg: return -lhs->eval(x);
    case Kind::Add: return lhs->eval(x) + rhs->eval(x);
    case Kind::Sub: return lhs->eval(x) - rhs->eval(x);
    case Kind::Mul: return lhs->eval(x) * rhs->eval(x);
    case Kind::Div: return lhs->eval(x) / rhs->eval(x);
    case Kind::Pow: return std::pow(lhs->eval(x), rhs->eval(x));
    case Kind::Call: return fn(lhs->eval(x));
    }
    return 0.0;
  }
};

namespace
{

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr)
{
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

double fn_exp(double v) { return std::exp(v); }
double fn_log(double v) { return std::log(v); }
double fn_sqrt(double v) { return std::sqrt(v); }
double fn_abs(double v) { return std::fabs(v); }
double fn_sin(double v) { return std::sin(v); }
double fn_cos(double v) { return std::cos(v); }
double fn_tanh(double v) { return std::tanh(v); }

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'x' | name '(' expr ')' | '(' expr ')'
class Parser
{
public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse()
  {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const
  {
    throw Error(ErrorCode::InvalidArgument,
                "expression '" + std::string(s_) + "': " + msg + " at column " + std::to_string(pos_));
  }

  void skip()
  {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c)
  {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c)
    {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr()
  {
    NodePtr l = term();
    for (;;)
    {
      if (accept('+')) l = make(Kind::Add, l, term());
      else if (accept('-')) l = make(Kind::Sub, l, term());
      else return l;
    }
  }

  NodePtr term()
  {
    NodePtr l = unary();
    for (;;)
    {
      if (accept('*')) l = make(Kind::Mul, l, unary());
      else if (accept('/')) l = make(Kind::Div, l, unary());
      else return l;
    }
  }

  NodePtr unary()
  {
    if (accept('-')) return make(Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power()
  {
    NodePtr base = atom();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr atom()
  {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('('))
    {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
    {
      const std::string rest(s_.substr(pos_));
      char *end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("bad number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)))
    {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      if (name == "x") return make(Kind::Variable);
      double (*fn)(double) = nullptr;
      if (name == "exp") fn = fn_exp;
      else if (name == "log") fn = fn_log;
      else if (name == "sqrt") fn = fn_sqrt;
      else if (name == "abs") fn = fn_abs;
      else if (name == "sin") fn = fn_sin;
      else if (name == "cos") fn = fn_cos;
      else if (name == "tanh") fn = fn_tanh;
      else fail("unknown identifier '" + std::string(name) + "'");
      if (!accept('(')) fail("expected '(' after function name");
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Call;
      n->fn = fn;
      n->lhs = std::move(arg);
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string text, std::shared_ptr<const Node> root)
  : text_(std::move(text)), root_(std::move(root))
{
}

Expression Expression::parse(std::string_view text)
{
  Parser p(text);
  return Expression(std::string(text), p.parse());
}

double Expression::operator()(double x) const { return root_->eval(x); }

}  // namespace memflow
