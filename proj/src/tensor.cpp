// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "memflow/error.hpp"

namespace memflow
{

namespace
{

std::size_t component_count(int order)
{
  if (order < 0 || order > Tensor::kMaxOrder)
    throw Error(ErrorCode::InvalidArgument, "tensor order out of range: " + std::to_string(order));
  return std::size_t{1} << order;
}

}  // namespace

Tensor::Tensor(int order) : order_(order), c_(component_count(order), 0.0) {}

Tensor::Tensor(int order, std::initializer_list<double> components)
  : Tensor(order, std::span<const double>(components.begin(), components.size()))
{
}

Tensor::Tensor(int order, std::span<const double> components) : Tensor(order)
{
  if (components.size() != c_.size())
    throw Error(ErrorCode::InvalidArgument, "component count does not match tensor order");
  std::copy(components.begin(), components.end(), c_.begin());
}

Tensor Tensor::identity() { return Tensor(2, {1.0, 0.0, 0.0, 1.0}); }

Tensor Tensor::basis(int i, int j)
{
  Tensor t(2);
  t.at({i, j}) = 1.0;
  return t;
}

std::size_t Tensor::flat_index(std::initializer_list<int> index) const
{
  if (static_cast<int>(index.size()) != order_)
    throw Error(ErrorCode::InvalidArgument, "index arity does not match tensor order");
  std::size_t flat = 0;
  for (int i : index)
  {
    if (i < 0 || i >= kDim) throw Error(ErrorCode::InvalidArgument, "tensor index out of range");
    flat = flat * kDim + static_cast<std::size_t>(i);
  }
  return flat;
}

double &Tensor::at(std::initializer_list<int> index) { return c_[flat_index(index)]; }
double Tensor::at(std::initializer_list<int> index) const { return c_[flat_index(index)]; }

Tensor &Tensor::operator+=(const Tensor &other)
{
  if (other.order_ != order_) throw Error(ErrorCode::InvalidArgument, "order mismatch in tensor sum");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
  return *this;
}

Tensor &Tensor::operator*=(double a)
{
  for (double &v : c_) v *= a;
  return *this;
}

Tensor operator+(Tensor a, const Tensor &b) { return a += b; }
Tensor operator*(double a, Tensor t) { return t *= a; }

Tensor contract(const Tensor &a, const Tensor &b, int s)
{
  const int p = a.order();
  const int q = b.order();
  if (s < 0 || s > std::min(p, q))
    throw Error(ErrorCode::InvalidArgument, "contraction depth " + std::to_string(s) +
                                                " outside [0, " + std::to_string(std::min(p, q)) + "]");
  // Row-major storage makes the contraction a (2^(p-s) x 2^s) * (2^s x 2^(q-s)) matrix product.
  const std::size_t rows = std::size_t{1} << (p - s);
  const std::size_t inner = std::size_t{1} << s;
  const std::size_t cols = std::size_t{1} << (q - s);
  Tensor out(p + q - 2 * s);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
    {
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += a[i * inner + k] * b[k * cols + j];
      out[i * cols + j] = acc;
    }
  return out;
}

double frobenius_norm(const Tensor &a)
{
  double acc = 0.0;
  for (double v : a.components()) acc += v * v;
  return std::sqrt(acc);
}

Invariants2 invariants2(const Tensor &g)
{
  if (g.order() != 2) throw Error(ErrorCode::InvalidArgument, "invariants2 needs an order-2 tensor");
  const Mat2 m = to_mat2(g);
  return {m.trace(), m.det(), m.frob2()};
}

Tensor to_tensor(const Mat2 &m) { return Tensor(2, {m.xx, m.xy, m.yx, m.yy}); }

Mat2 to_mat2(const Tensor &t)
{
  if (t.order() != 2) throw Error(ErrorCode::InvalidArgument, "expected an order-2 tensor");
  return {t[0], t[1], t[2], t[3]};
}

template <class Rng>
Tensor random_tensor(int order, Rng &rng)
{
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Tensor t(order);
  for (double &c : t.components()) c = d(rng);
  return t;
}

template Tensor random_tensor(int, std::mt19937_64 &);

TensorPropertyReport tensor_property_suite(std::size_t trials, std::uint64_t seed, double tol)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> order(1, 4);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  TensorPropertyReport r;
  r.trials = trials;
  for (std::size_t t = 0; t < trials; ++t)
  {
    const int p = order(rng), q = order(rng);
    const int s = std::uniform_int_distribution<int>(0, std::min(p, q))(rng);
    const Tensor a = random_tensor(p, rng), b = random_tensor(q, rng);
    const double bound = frobenius_norm(a) * frobenius_norm(b);
    const double lhs = frobenius_norm(contract(a, b, s));
    r.cauchy_schwarz_worst = std::max(r.cauchy_schwarz_worst, lhs / bound);
    if (lhs > bound * (1.0 + tol)) ++r.cauchy_schwarz_violations;

    // Full contraction as an inner product on order-p tensors.
    const Tensor c = random_tensor(p, rng), d = random_tensor(p, rng);
    const double alpha = coef(rng), beta = coef(rng);
    const double cd = contract(c, d, p)[0], dc = contract(d, c, p)[0];
    const double lin = contract(alpha * c + beta * d, a, p)[0];
    const double lin_ref = alpha * contract(c, a, p)[0] + beta * contract(d, a, p)[0];
    const double cc = contract(c, c, p)[0];
    const double nc = frobenius_norm(c), na = frobenius_norm(a);
    const double scale = (nc + frobenius_norm(d)) * (nc + frobenius_norm(d) + na) * 4.0;
    if (std::fabs(cd - dc) > tol * scale || std::fabs(lin - lin_ref) > tol * scale || !(cc > 0.0) ||
        std::fabs(cc - nc * nc) > tol * nc * nc)
      ++r.inner_product_violations;

    const Tensor g = random_tensor(2, rng);
    const Invariants2 inv = invariants2(g);
    if (inv.i1 < 2.0 * std::fabs(inv.det) * (1.0 - tol)) ++r.am_gm_violations;
  }
  r.pass = r.cauchy_schwarz_violations == 0 && r.inner_product_violations == 0 && r.am_gm_violations == 0;
  return r;
}

}  // namespace memflow
