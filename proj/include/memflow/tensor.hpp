// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <cstdint>
#include <span>
#include <vector>

namespace memflow
{

/// Dense real tensor over R^2 with components stored row-major in the index
/// tuple (i1 slowest). Orders 1..4 are the working set; contraction results
/// may reach order 8 and order 0 holds a scalar.
class Tensor
{
public:
  static constexpr int kDim = 2;
  static constexpr int kMaxOrder = 8;

  explicit Tensor(int order = 0);
  Tensor(int order, std::initializer_list<double> components);
  Tensor(int order, std::span<const double> components);

  static Tensor identity();
  static Tensor basis(int i, int j);  // e_i ⊗ e_j, zero-based

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return c_.size(); }

  std::span<double> components() noexcept { return c_; }
  std::span<const double> components() const noexcept { return c_; }

  double &operator[](std::size_t flat) { return c_[flat]; }
  double operator[](std::size_t flat) const { return c_[flat]; }

  double &at(std::initializer_list<int> index);
  double at(std::initializer_list<int> index) const;

  Tensor &operator+=(const Tensor &other);
  Tensor &operator*=(double a);

private:
  std::size_t flat_index(std::initializer_list<int> index) const;

  int order_;
  std::vector<double> c_;
};

Tensor operator+(Tensor a, const Tensor &b);
Tensor operator*(double a, Tensor t);

/// Generalized contraction A (s): B summing the last s indices of A against
/// the first s indices of B. Throws on s outside [0, min(p, q)].
Tensor contract(const Tensor &a, const Tensor &b, int s);

double frobenius_norm(const Tensor &a);

struct Invariants2
{
  double trace;
  double det;
  double i1;  // Tr(GᵀG)
};

Invariants2 invariants2(const Tensor &g);

/// 2x2 matrix used in per-node loops. Layout matches an order-2 Tensor.
struct Mat2
{
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  constexpr double operator()(int i, int j) const
  {
    return i == 0 ? (j == 0 ? xx : xy) : (j == 0 ? yx : yy);
  }

  constexpr Mat2 transpose() const { return {xx, yx, xy, yy}; }
  constexpr double trace() const { return xx + yy; }
  constexpr double det() const { return xx * yy - xy * yx; }
  constexpr double frob2() const { return xx * xx + xy * xy + yx * yx + yy * yy; }
  double frob() const { return std::sqrt(frob2()); }

  constexpr Mat2 &operator+=(const Mat2 &o)
  {
    xx += o.xx; xy += o.xy; yx += o.yx; yy += o.yy;
    return *this;
  }
  constexpr Mat2 &operator-=(const Mat2 &o)
  {
    xx -= o.xx; xy -= o.xy; yx -= o.yx; yy -= o.yy;
    return *this;
  }
  constexpr Mat2 &operator*=(double a)
  {
    xx *= a; xy *= a; yx *= a; yy *= a;
    return *this;
  }

  friend constexpr Mat2 operator+(Mat2 a, const Mat2 &b) { return a += b; }
  friend constexpr Mat2 operator-(Mat2 a, const Mat2 &b) { return a -= b; }
  friend constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
  friend constexpr Mat2 operator*(const Mat2 &a, const Mat2 &b)
  {
    return {a.xx * b.xx + a.xy * b.yx, a.xx * b.xy + a.xy * b.yy,
            a.yx * b.xx + a.yy * b.yx, a.yx * b.xy + a.yy * b.yy};
  }
  friend constexpr bool operator==(const Mat2 &, const Mat2 &) = default;
};

/// Frobenius scalar product A : B.
constexpr double ddot(const Mat2 &a, const Mat2 &b)
{
  return a.xx * b.xx + a.xy * b.xy + a.yx * b.yx + a.yy * b.yy;
}

Tensor to_tensor(const Mat2 &m);
Mat2 to_mat2(const Tensor &t);

/// Tensor with components uniform in [-1, 1].
template <class Rng>
Tensor random_tensor(int order, Rng &rng);

struct TensorPropertyReport
{
  std::size_t trials = 0;
  std::size_t cauchy_schwarz_violations = 0;
  double cauchy_schwarz_worst = 0.0;  // max |A (s) B| / (|A||B|)
  std::size_t inner_product_violations = 0;
  std::size_t am_gm_violations = 0;
  bool pass = false;
};

/// Random checks of |A (s) B| <= |A||B| over every (p, q, s) with p, q <= 4,
/// symmetry, bilinearity and positivity of the full contraction, and
/// |G|^2 >= 2|det G|. Violations count relative excess beyond `tol`.
TensorPropertyReport tensor_property_suite(std::size_t trials, std::uint64_t seed = 2024, double tol = 1e-12);

}  // namespace memflow
