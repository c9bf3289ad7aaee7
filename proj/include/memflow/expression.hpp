// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace memflow
{

/// Scalar expression in one variable `x`, parsed from text such as
/// "1/(1+x^2)" or "exp(-sqrt(x))". Supports + - * / ^, unary minus,
/// parentheses, and exp, log, sqrt, abs, sin, cos, tanh.
class Expression
{
public:
  static Expression parse(std::string_view text);

  double operator()(double x) const;
  const std::string &text() const noexcept { return text_; }

  struct Node;

private:
  Expression(std::string text, std::shared_ptr<const Node> root);

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace memflow
