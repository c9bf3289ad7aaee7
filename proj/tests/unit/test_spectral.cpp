// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "memflow/error.hpp"
#include "memflow/flow.hpp"
#include "memflow/spectral.hpp"

namespace
{

using namespace memflow;

ScalarField sample(int n, const std::function<double(double, double)> &f)
{
  const TorusGrid g(n);
  ScalarField s(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = f(g.x(i), g.x(j));
  return s;
}

double max_diff(const ScalarField &a, const ScalarField &b)
{
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::fabs(a[p] - b[p]));
  return m;
}

TEST(TorusGrid, Validation)
{
  EXPECT_THROW(TorusGrid(8), Error);
  EXPECT_THROW(TorusGrid(48), Error);
  EXPECT_NO_THROW(TorusGrid(16));
  EXPECT_NEAR(TorusGrid(64).dx(), 2 * M_PI / 64, 1e-16);
}

TEST(Spectral, Derivatives)
{
  const Spectral sp(32);
  auto sx = sample(32, [](double x, double) { return std::sin(x); });
  EXPECT_LT(max_diff(sp.derivative(sx, 1), sample(32, [](double x, double) { return std::cos(x); })), 1e-12);
  EXPECT_LT(max_diff(sp.derivative(ScalarField(32, 3.0), 2), ScalarField(32)), 1e-15);
  auto f = sample(32, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
  auto want = sample(32, [](double x, double y) { return -2 * std::sin(3 * x) * std::sin(2 * y); });
  EXPECT_LT(max_diff(sp.derivative(f, 2), want), 1e-12);
}

TEST(Spectral, RoundTripAndParseval)
{
  const Spectral sp(32);
  const auto f = sample(32, [](double x, double y) { return std::exp(std::sin(x) * std::cos(y)); });
  EXPECT_LT(max_diff(sp.inverse(sp.forward(f)), f), 1e-14);
  EXPECT_NEAR(sp.l2_norm_spectral(f), lq_norm(f, 2.0), 1e-12);
}

TEST(Spectral, LerayProjection)
{
  const Spectral sp(32);
  VectorField grad;
  const auto phi = sample(32, [](double x, double y) { return std::sin(2 * x) * std::cos(y) + std::cos(3 * y); });
  grad.c[0] = sp.derivative(phi, 1);
  grad.c[1] = sp.derivative(phi, 2);
  const VectorField z = sp.leray_project(grad);
  EXPECT_LT(linf_norm(z), 1e-13);

  VectorField v;
  v.c[0] = sample(32, [](double, double y) { return std::sin(y); });
  v.c[1] = sample(32, [](double x, double) { return std::sin(x); });
  const VectorField pv = sp.leray_project(v);
  for (int c = 0; c < 2; ++c) EXPECT_LT(max_diff(pv.c[c], v.c[c]), 1e-14);

  const VectorField tg = taylor_green(32);
  const VectorField ptg = sp.leray_project(tg);
  for (int c = 0; c < 2; ++c) EXPECT_LT(max_diff(ptg.c[c], tg.c[c]), 1e-14);

  VectorField mixed = tg;
  for (int c = 0; c < 2; ++c)
    for (std::size_t p = 0; p < mixed.c[c].size(); ++p) mixed.c[c][p] += grad.c[c][p];
  const VectorField pm = sp.leray_project(mixed);
  EXPECT_LT(linf_norm(sp.divergence(pm)), 1e-12);
  const VectorField ppm = sp.leray_project(pm);
  for (int c = 0; c < 2; ++c) EXPECT_LT(max_diff(ppm.c[c], pm.c[c]), 1e-14);
}

TEST(Spectral, PressureRecovery)
{
  const Spectral sp(32);
  EXPECT_LT(linf_norm(sp.pressure_recover(TensorField2(32), VectorField(32))), 1e-15);

  TensorField2 iso(32);
  iso.c[0] = ScalarField(32, 2.5);
  iso.c[3] = ScalarField(32, 2.5);
  EXPECT_LT(linf_norm(sp.pressure_recover(iso, VectorField(32))), 1e-14);

  // Taylor-Green: Δp = div div(-u ⊗ u) gives p = (cos 2x1 + cos 2x2)/4.
  const auto p = sp.pressure_recover(TensorField2(32), taylor_green(32));
  const auto want = sample(32, [](double x, double y) { return 0.25 * (std::cos(2 * x) + std::cos(2 * y)); });
  EXPECT_LT(max_diff(p, want), 1e-14);
}

TEST(Spectral, ViscousPropagation)
{
  const Spectral sp(32);
  VectorField u;
  u.c[0] = sample(32, [](double, double y) { return std::sin(y); });
  u.c[1] = ScalarField(32);
  const VectorField same = sp.viscous_propagate(u, 1.0, 0.0);
  EXPECT_LT(max_diff(same.c[0], u.c[0]), 1e-15);
  const VectorField d = sp.viscous_propagate(u, 1.0, 0.3);
  EXPECT_LT(max_diff(d.c[0], sample(32, [](double, double y) { return std::exp(-0.3) * std::sin(y); })), 1e-14);

  const VectorField r = random_band_limited(sp, 3, 8, 1.0);
  EXPECT_LE(lq_norm(sp.viscous_propagate(r, 0.1, 0.5), 2.0), lq_norm(r, 2.0));
}

TEST(Spectral, Dealias)
{
  const int n = 64;
  const Spectral sp(n);
  const auto low = sample(n, [](double x, double y) { return std::sin(5 * x) * std::cos(21 * y) + 1.0; });
  EXPECT_LT(max_diff(sp.dealias(low), low), 1e-13);
  const auto high = sample(n, [n](double x, double) { return std::cos((n / 2 - 1) * x); });
  EXPECT_LT(linf_norm(sp.dealias(high)), 1e-13);
  const auto mixed = sample(n, [](double x, double y) { return std::exp(std::cos(x + 2 * y)); });
  const auto once = sp.dealias(mixed);
  EXPECT_EQ(max_diff(sp.dealias(once), once) < 1e-14, true);
}

TEST(Spectral, HermitianRealFields)
{
  const Spectral sp(32);
  const VectorField r = random_band_limited(sp, 17, 5, 2.0);
  EXPECT_NEAR(linf_norm(r), 2.0, 1e-12);
  EXPECT_LT(linf_norm(sp.divergence(r)), 1e-12);
  // A real field survives the round trip through the half spectrum unchanged.
  for (int c = 0; c < 2; ++c) EXPECT_LT(max_diff(sp.inverse(sp.forward(r.c[c])), r.c[c]), 1e-13);
}

TEST(Norms, ConstantsAndOrders)
{
  const ScalarField one(16, 1.0);
  const double area = 4 * M_PI * M_PI;
  EXPECT_NEAR(lq_norm(one, 2.0), std::sqrt(area), 1e-12);
  EXPECT_NEAR(lq_norm(one, 8.0), std::pow(area, 1.0 / 8.0), 1e-12);
  EXPECT_NEAR(lq_norm(one, INFINITY), 1.0, 0.0);
  TensorField2 id(16);
  id.c[0] = one;
  id.c[3] = one;
  EXPECT_NEAR(lq_norm(id, 2.0), std::sqrt(2.0 * area), 1e-12);
  EXPECT_NEAR(linf_norm(id), std::sqrt(2.0), 1e-15);
}

TEST(Gradient, TensorLayout)
{
  const Spectral sp(32);
  TensorField2 tau(32);
  tau.c[0] = sample(32, [](double x, double) { return std::sin(x); });
  const TensorField3 g = sp.gradient(tau);
  // d_1 tau_11 at component 0, d_2 tau_11 at component 4.
  EXPECT_LT(max_diff(g.c[0], sample(32, [](double x, double) { return std::cos(x); })), 1e-13);
  EXPECT_LT(linf_norm(g.c[4]), 1e-13);
  EXPECT_NEAR(lq_norm(g, 2.0), M_PI * std::sqrt(2.0), 1e-12);
}

}  // namespace
