// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace memflow
{

void *fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void *p) noexcept;

/// Allocator returning SIMD-aligned storage so any buffer may be passed to a
/// shared FFT plan through the new-array execute interface.
template <class T>
struct FftwAllocator
{
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U> &) noexcept
  {
  }
  T *allocate(std::size_t n)
  {
    if (n == 0) return nullptr;
    return static_cast<T *>(fftw_aligned_alloc(n * sizeof(T)));
  }
  void deallocate(T *p, std::size_t) noexcept { fftw_aligned_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U> &) const noexcept
  {
    return true;
  }
};

using Complex = std::complex<double>;
using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;

/// The periodic square [0, 2π)² sampled on N x N points, N a power of two
/// no smaller than 16. Index (i, j) is the point (x1, x2) = (i dx, j dx).
/// Real-to-complex storage keeps k2 in 0..N/2.
class TorusGrid
{
public:
  explicit TorusGrid(int n);

  int n() const noexcept { return n_; }
  std::size_t points() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  int half() const noexcept { return n_ / 2 + 1; }
  std::size_t modes() const noexcept { return static_cast<std::size_t>(n_) * half(); }
  double dx() const noexcept;
  double x(int i) const noexcept { return dx() * i; }

  /// Wavenumber of row i in {-N/2+1, ..., N/2}.
  int k1(int i) const noexcept { return i <= n_ / 2 ? i : i - n_; }
  int k2(int j) const noexcept { return j; }
  /// Modes with max(|k1|, |k2|) above this are removed by the two-thirds rule.
  int cutoff() const noexcept { return n_ / 3; }

private:
  int n_;
};

class ScalarField
{
public:
  ScalarField() = default;
  explicit ScalarField(int n, double value = 0.0)
    : n_(n), v_(static_cast<std::size_t>(n) * n, value)
  {
  }

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return v_.size(); }
  double *data() noexcept { return v_.data(); }
  const double *data() const noexcept { return v_.data(); }
  std::span<double> values() noexcept { return v_; }
  std::span<const double> values() const noexcept { return v_; }
  double &operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * n_ + j]; }
  double &operator[](std::size_t p) { return v_[p]; }
  double operator[](std::size_t p) const { return v_[p]; }

  friend bool operator==(const ScalarField &a, const ScalarField &b) { return a.n_ == b.n_ && a.v_ == b.v_; }

private:
  int n_ = 0;
  RealBuffer v_;
};

/// Fixed number of real components per grid point.
template <std::size_t C>
struct FieldN
{
  static constexpr std::size_t kComponents = C;
  std::array<ScalarField, C> c;

  FieldN() = default;
  explicit FieldN(int n, double value = 0.0)
  {
    for (auto &f : c) f = ScalarField(n, value);
  }
  int n() const noexcept { return c[0].n(); }
  ScalarField &operator[](std::size_t k) { return c[k]; }
  const ScalarField &operator[](std::size_t k) const { return c[k]; }

  friend bool operator==(const FieldN &a, const FieldN &b) { return a.c == b.c; }
};

/// Velocity u = (u1, u2).
using VectorField = FieldN<2>;
/// Components (11, 12, 21, 22) of a 2-tensor field.
using TensorField2 = FieldN<4>;
/// Gradient of a 2-tensor field; component 4*i + c is d_i of tensor component c.
using TensorField3 = FieldN<8>;

TensorField2 identity_tensor_field(int n);

class Spectrum
{
public:
  Spectrum() = default;
  explicit Spectrum(const TorusGrid &g) : n_(g.n()), v_(g.modes(), Complex{}) {}

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return v_.size(); }
  Complex *data() noexcept { return v_.data(); }
  const Complex *data() const noexcept { return v_.data(); }
  Complex &operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * (n_ / 2 + 1) + j]; }
  Complex operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * (n_ / 2 + 1) + j]; }
  Complex &operator[](std::size_t p) { return v_[p]; }
  Complex operator[](std::size_t p) const { return v_[p]; }

private:
  int n_ = 0;
  ComplexBuffer v_;
};

/// FFT plans and Fourier-space operators on one torus grid. Plans are created
/// once; transforms and operators are safe to call concurrently.
class Spectral
{
public:
  explicit Spectral(int n);
  ~Spectral();
  Spectral(const Spectral &) = delete;
  Spectral &operator=(const Spectral &) = delete;

  const TorusGrid &grid() const noexcept { return grid_; }
  int n() const noexcept { return grid_.n(); }

  /// Fourier coefficients normalized so a unit-amplitude mode has |f̂| = 1/2.
  void forward(const double *in, Complex *out) const;
  /// Inverse transform; `scratch` (modes() entries) is clobbered, `in` is not.
  void inverse(const Complex *in, double *out, Complex *scratch) const;

  Spectrum forward(const ScalarField &f) const;
  ScalarField inverse(const Spectrum &s) const;

  /// 1 where the two-thirds rule keeps a mode, 0 elsewhere (Nyquist removed).
  const std::vector<double> &dealias_mask() const noexcept { return mask_; }
  /// i k_dir per mode with Nyquist entries of the direction zeroed.
  const std::vector<double> &ik(int dir) const noexcept { return dir == 1 ? ik1_ : ik2_; }
  /// |k|² per mode.
  const std::vector<double> &k_squared() const noexcept { return k2_; }

  ScalarField derivative(const ScalarField &f, int dir) const;
  template <std::size_t C>
  FieldN<C> derivative(const FieldN<C> &f, int dir) const
  {
    FieldN<C> out;
    for (std::size_t k = 0; k < C; ++k) out.c[k] = derivative(f.c[k], dir);
    return out;
  }

  ScalarField dealias(const ScalarField &f) const;
  template <std::size_t C>
  FieldN<C> dealias(const FieldN<C> &f) const
  {
    FieldN<C> out;
    for (std::size_t k = 0; k < C; ++k) out.c[k] = dealias(f.c[k]);
    return out;
  }

  VectorField leray_project(const VectorField &v) const;
  /// p = -(-Δ)^{-1} div div (tau - u ⊗ u), zero mean.
  ScalarField pressure_recover(const TensorField2 &tau, const VectorField &u) const;
  /// û_k -> exp(-eta |k|² dt) û_k.
  VectorField viscous_propagate(const VectorField &u, double eta, double dt) const;

  ScalarField divergence(const VectorField &v) const;
  /// (div tau)_k = d_j tau_jk.
  VectorField divergence(const TensorField2 &tau) const;
  /// L_lk = d_l u_k stored as (L11, L12, L21, L22).
  TensorField2 gradient(const VectorField &u) const;
  /// d_i G_jk stored at component 4*i + (2*j + k).
  TensorField3 gradient(const TensorField2 &g) const;

  /// Spectral L² norm via Parseval, including the (2π)² area factor.
  double l2_norm_spectral(const ScalarField &f) const;

private:
  TorusGrid grid_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::vector<double> mask_;
  std::vector<double> ik1_, ik2_;
  std::vector<double> k2_;
};

/// Discrete L^q norm ((2π)²/N² Σ |f|^q)^{1/q} of the pointwise Frobenius norm.
double lq_norm(const ScalarField &f, double q);
template <std::size_t C>
double lq_norm(const FieldN<C> &f, double q);
double linf_norm(const ScalarField &f);
template <std::size_t C>
double linf_norm(const FieldN<C> &f);
double mean(const ScalarField &f);

}  // namespace memflow
