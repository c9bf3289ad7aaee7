// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "memflow/error.hpp"

namespace memflow
{

namespace
{

// FFTW planning is not thread-safe.
std::mutex &planner_mutex()
{
  static std::mutex m;
  return m;
}

}  // namespace

void *fftw_aligned_alloc(std::size_t bytes)
{
  void *p = fftw_malloc(bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void fftw_aligned_free(void *p) noexcept { fftw_free(p); }

TorusGrid::TorusGrid(int n) : n_(n)
{
  if (n < 16 || (n & (n - 1)) != 0)
    throw Error(ErrorCode::InvalidArgument, "grid size must be a power of two >= 16, got " + std::to_string(n));
}

double TorusGrid::dx() const noexcept { return 2.0 * M_PI / n_; }

TensorField2 identity_tensor_field(int n)
{
  TensorField2 g(n);
  std::fill(g.c[0].values().begin(), g.c[0].values().end(), 1.0);
  std::fill(g.c[3].values().begin(), g.c[3].values().end(), 1.0);
  return g;
}

struct Spectral::Plans
{
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

Spectral::Spectral(int n) : grid_(n), plans_(std::make_unique<Plans>())
{
  const std::size_t np = grid_.points();
  const std::size_t nm = grid_.modes();
  {
    RealBuffer real(np);
    ComplexBuffer spec(nm);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plans_->r2c = fftw_plan_dft_r2c_2d(n, n, real.data(), reinterpret_cast<fftw_complex *>(spec.data()),
                                       FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex *>(spec.data()), real.data(),
                                       FFTW_ESTIMATE);
  }
  if (plans_->r2c == nullptr || plans_->c2r == nullptr)
    throw Error(ErrorCode::InvalidArgument, "FFT planning failed");

  mask_.resize(nm);
  ik1_.resize(nm);
  ik2_.resize(nm);
  k2_.resize(nm);
  const int h = grid_.half();
  const int cut = grid_.cutoff();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < h; ++j)
    {
      const std::size_t p = static_cast<std::size_t>(i) * h + j;
      const int a = grid_.k1(i);
      const int b = grid_.k2(j);
      mask_[p] = (std::abs(a) <= cut && std::abs(b) <= cut) ? 1.0 : 0.0;
      ik1_[p] = (i == n / 2) ? 0.0 : static_cast<double>(a);
      ik2_[p] = (j == n / 2) ? 0.0 : static_cast<double>(b);
      k2_[p] = static_cast<double>(a) * a + static_cast<double>(b) * b;
    }
}

Spectral::~Spectral()
{
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plans_->r2c);
  fftw_destroy_plan(plans_->c2r);
}

void Spectral::forward(const double *in, Complex *out) const
{
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double *>(in), reinterpret_cast<fftw_complex *>(out));
  const double scale = 1.0 / static_cast<double>(grid_.points());
  const std::size_t nm = grid_.modes();
  for (std::size_t p = 0; p < nm; ++p) out[p] *= scale;
}

void Spectral::inverse(const Complex *in, double *out, Complex *scratch) const
{
  std::copy(in, in + grid_.modes(), scratch);
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex *>(scratch), out);
}

Spectrum Spectral::forward(const ScalarField &f) const
{
  Spectrum s(grid_);
  forward(f.data(), s.data());
  return s;
}

ScalarField Spectral::inverse(const Spectrum &s) const
{
  ScalarField f(n());
  ComplexBuffer scratch(grid_.modes());
  inverse(s.data(), f.data(), scratch.data());
  return f;
}

ScalarField Spectral::derivative(const ScalarField &f, int dir) const
{
  Spectrum s = forward(f);
  const auto &k = ik(dir);
  for (std::size_t p = 0; p < s.size(); ++p) s[p] = Complex(-k[p] * s[p].imag(), k[p] * s[p].real());
  return inverse(s);
}

ScalarField Spectral::dealias(const ScalarField &f) const
{
  Spectrum s = forward(f);
  for (std::size_t p = 0; p < s.size(); ++p) s[p] *= mask_[p];
  return inverse(s);
}

VectorField Spectral::leray_project(const VectorField &v) const
{
  Spectrum a = forward(v.c[0]);
  Spectrum b = forward(v.c[1]);
  const int h = grid_.half();
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < h; ++j)
    {
      const std::size_t p = static_cast<std::size_t>(i) * h + j;
      if (k2_[p] == 0.0) continue;
      const double k1 = grid_.k1(i), k2 = grid_.k2(j);
      const Complex kv = (k1 * a[p] + k2 * b[p]) / k2_[p];
      a[p] -= k1 * kv;
      b[p] -= k2 * kv;
    }
  VectorField out;
  out.c[0] = inverse(a);
  out.c[1] = inverse(b);
  return out;
}

ScalarField Spectral::pressure_recover(const TensorField2 &tau, const VectorField &u) const
{
  TensorField2 a(n());
  for (std::size_t p = 0; p < grid_.points(); ++p)
  {
    const double u1 = u.c[0][p], u2 = u.c[1][p];
    a.c[0][p] = tau.c[0][p] - u1 * u1;
    a.c[1][p] = tau.c[1][p] - u1 * u2;
    a.c[2][p] = tau.c[2][p] - u2 * u1;
    a.c[3][p] = tau.c[3][p] - u2 * u2;
  }
  std::array<Spectrum, 4> s;
  for (std::size_t c = 0; c < 4; ++c) s[c] = forward(a.c[c]);
  Spectrum p_hat(grid_);
  const int h = grid_.half();
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < h; ++j)
    {
      const std::size_t p = static_cast<std::size_t>(i) * h + j;
      if (k2_[p] == 0.0) continue;
      const double k1 = grid_.k1(i), k2 = grid_.k2(j);
      const Complex kka = k1 * k1 * s[0][p] + k1 * k2 * (s[1][p] + s[2][p]) + k2 * k2 * s[3][p];
      p_hat[p] = mask_[p] * kka / k2_[p];
    }
  return inverse(p_hat);
}

VectorField Spectral::viscous_propagate(const VectorField &u, double eta, double dt) const
{
  if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidArgument, "viscous propagation needs dt >= 0");
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "viscosity must be positive");
  VectorField out;
  for (std::size_t c = 0; c < 2; ++c)
  {
    Spectrum s = forward(u.c[c]);
    for (std::size_t p = 0; p < s.size(); ++p) s[p] *= std::exp(-eta * k2_[p] * dt);
    out.c[c] = inverse(s);
  }
  return out;
}

ScalarField Spectral::divergence(const VectorField &v) const
{
  ScalarField d = derivative(v.c[0], 1);
  const ScalarField e = derivative(v.c[1], 2);
  for (std::size_t p = 0; p < d.size(); ++p) d[p] += e[p];
  return d;
}

VectorField Spectral::divergence(const TensorField2 &tau) const
{
  VectorField out;
  for (std::size_t k = 0; k < 2; ++k)
  {
    out.c[k] = derivative(tau.c[k], 1);
    const ScalarField e = derivative(tau.c[2 + k], 2);
    for (std::size_t p = 0; p < e.size(); ++p) out.c[k][p] += e[p];
  }
  return out;
}

TensorField2 Spectral::gradient(const VectorField &u) const
{
  TensorField2 l;
  for (int dir = 1; dir <= 2; ++dir)
    for (std::size_t k = 0; k < 2; ++k) l.c[2 * (dir - 1) + k] = derivative(u.c[k], dir);
  return l;
}

TensorField3 Spectral::gradient(const TensorField2 &g) const
{
  TensorField3 d;
  for (int dir = 1; dir <= 2; ++dir)
    for (std::size_t c = 0; c < 4; ++c) d.c[4 * (dir - 1) + c] = derivative(g.c[c], dir);
  return d;
}

double Spectral::l2_norm_spectral(const ScalarField &f) const
{
  const Spectrum s = forward(f);
  const int h = grid_.half();
  double acc = 0.0;
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < h; ++j)
    {
      const double w = (j == 0 || j == n() / 2) ? 1.0 : 2.0;
      acc += w * std::norm(s(i, j));
    }
  return 2.0 * M_PI * std::sqrt(acc);
}

// ---------------------------------------------------------------------------

namespace
{

template <class PointNorm>
double lq_impl(std::size_t points, int n, double q, PointNorm norm_at)
{
  if (std::isinf(q))
  {
    double m = 0.0;
    for (std::size_t p = 0; p < points; ++p) m = std::max(m, norm_at(p));
    return m;
  }
  if (!(q >= 1.0)) throw Error(ErrorCode::InvalidArgument, "L^q norm needs q >= 1");
  double acc = 0.0;
  for (std::size_t p = 0; p < points; ++p) acc += std::pow(norm_at(p), q);
  const double area = 4.0 * M_PI * M_PI / (static_cast<double>(n) * n);
  return std::pow(area * acc, 1.0 / q);
}

}  // namespace

double lq_norm(const ScalarField &f, double q)
{
  return lq_impl(f.size(), f.n(), q, [&](std::size_t p) { return std::fabs(f[p]); });
}

template <std::size_t C>
double lq_norm(const FieldN<C> &f, double q)
{
  return lq_impl(f.c[0].size(), f.n(), q, [&](std::size_t p) {
    double s = 0.0;
    for (std::size_t k = 0; k < C; ++k) s += f.c[k][p] * f.c[k][p];
    return std::sqrt(s);
  });
}

double linf_norm(const ScalarField &f) { return lq_norm(f, HUGE_VAL); }

template <std::size_t C>
double linf_norm(const FieldN<C> &f)
{
  return lq_norm(f, HUGE_VAL);
}

double mean(const ScalarField &f)
{
  double acc = 0.0;
  for (double v : f.values()) acc += v;
  return acc / static_cast<double>(f.size());
}

template double lq_norm<2>(const FieldN<2> &, double);
template double lq_norm<4>(const FieldN<4> &, double);
template double lq_norm<8>(const FieldN<8> &, double);
template double linf_norm<2>(const FieldN<2> &);
template double linf_norm<4>(const FieldN<4> &);
template double linf_norm<8>(const FieldN<8> &);

}  // namespace memflow
