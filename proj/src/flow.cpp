// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "memflow/error.hpp"

namespace memflow
{

namespace
{

Complex times_ik(double k, Complex z) { return {-k * z.imag(), k * z.real()}; }

struct Work
{
  Spectrum a, b, t;
  ScalarField u1, u2, d11, d21, d12, d22, n1, n2;
  ComplexBuffer scratch;

  explicit Work(const TorusGrid &g)
    : a(g), b(g), t(g), u1(g.n()), u2(g.n()), d11(g.n()), d21(g.n()), d12(g.n()), d22(g.n()), n1(g.n()),
      n2(g.n()), scratch(g.modes())
  {
  }
};

// out = mask * P(force - (u·∇u)^ + f̂), with force = (div tau)^.
void explicit_terms(const Spectral &sp, const Spectrum &u1h, const Spectrum &u2h, const Spectrum &f1,
                    const Spectrum &f2, Spectrum &o1, Spectrum &o2, Work &w)
{
  const std::size_t nm = sp.grid().modes();
  const auto &k1 = sp.ik(1);
  const auto &k2 = sp.ik(2);
  sp.inverse(u1h.data(), w.u1.data(), w.scratch.data());
  sp.inverse(u2h.data(), w.u2.data(), w.scratch.data());
  auto deriv = [&](const Spectrum &src, const std::vector<double> &k, ScalarField &dst) {
    for (std::size_t p = 0; p < nm; ++p) w.t[p] = times_ik(k[p], src[p]);
    sp.inverse(w.t.data(), dst.data(), w.scratch.data());
  };
  deriv(u1h, k1, w.d11);
  deriv(u1h, k2, w.d21);
  deriv(u2h, k1, w.d12);
  deriv(u2h, k2, w.d22);
  for (std::size_t p = 0; p < w.u1.size(); ++p)
  {
    w.n1[p] = w.u1[p] * w.d11[p] + w.u2[p] * w.d21[p];
    w.n2[p] = w.u1[p] * w.d12[p] + w.u2[p] * w.d22[p];
  }
  sp.forward(w.n1.data(), w.a.data());
  sp.forward(w.n2.data(), w.b.data());

  const TorusGrid &g = sp.grid();
  const auto &mask = sp.dealias_mask();
  const auto &ksq = sp.k_squared();
  const int h = g.half();
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < h; ++j)
    {
      const std::size_t p = static_cast<std::size_t>(i) * h + j;
      if (mask[p] == 0.0 || ksq[p] == 0.0)
      {
        o1[p] = 0.0;
        o2[p] = 0.0;
        continue;
      }
      const Complex v1 = f1[p] - w.a[p];
      const Complex v2 = f2[p] - w.b[p];
      const double q1 = g.k1(i), q2 = g.k2(j);
      const Complex kv = (q1 * v1 + q2 * v2) / ksq[p];
      o1[p] = v1 - q1 * kv;
      o2[p] = v2 - q2 * kv;
    }
}

}  // namespace

FlowStepper::FlowStepper(const Spectral &sp, double eta) : sp_(sp), eta_(eta)
{
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidArgument, "viscosity eta must be positive");
}

void FlowStepper::step(FlowState &s, const TensorField2 &tau, double dt) const
{
  advance(s, tau, dt, 1);
}

void FlowStepper::advance(FlowState &s, const TensorField2 &tau, double interval, int substeps) const
{
  if (!(interval > 0.0) || substeps < 1) throw Error(ErrorCode::InvalidArgument, "flow step needs dt > 0");
  if (s.u.n() != sp_.n() || tau.n() != sp_.n())
    throw Error(ErrorCode::InvalidArgument, "flow state grid does not match the spectral grid");
  const TorusGrid &g = sp_.grid();
  const std::size_t nm = g.modes();
  const auto &ksq = sp_.k_squared();
  const auto &k1 = sp_.ik(1);
  const auto &k2 = sp_.ik(2);
  const double dt = interval / substeps;

  Work w(g);
  // (div tau)_k = d_1 tau_1k + d_2 tau_2k
  std::array<Spectrum, 4> th;
  for (int c = 0; c < 4; ++c) th[c] = sp_.forward(tau.c[c]);
  Spectrum s1(g), s2(g);
  for (std::size_t p = 0; p < nm; ++p)
  {
    s1[p] = times_ik(k1[p], th[0][p]) + times_ik(k2[p], th[2][p]);
    s2[p] = times_ik(k1[p], th[1][p]) + times_ik(k2[p], th[3][p]);
  }

  std::vector<double> e(nm);
  for (std::size_t p = 0; p < nm; ++p) e[p] = std::exp(-eta_ * ksq[p] * dt);

  Spectrum u1 = sp_.forward(s.u.c[0]);
  Spectrum u2 = sp_.forward(s.u.c[1]);
  Spectrum f1(g), f2(g), a1(g), a2(g), k11(g), k12(g), k21(g), k22(g);

  auto total_force = [&](double t) {
    if (!forcing_)
    {
      f1 = s1;
      f2 = s2;
      return;
    }
    const VectorField f = forcing_(t);
    f1 = sp_.forward(f.c[0]);
    f2 = sp_.forward(f.c[1]);
    for (std::size_t p = 0; p < nm; ++p)
    {
      f1[p] += s1[p];
      f2[p] += s2[p];
    }
  };

  for (int m = 0; m < substeps; ++m)
  {
    const double t0 = s.t + m * dt;
    total_force(t0);
    explicit_terms(sp_, u1, u2, f1, f2, k11, k12, w);
    for (std::size_t p = 0; p < nm; ++p)
    {
      a1[p] = e[p] * (u1[p] + dt * k11[p]);
      a2[p] = e[p] * (u2[p] + dt * k12[p]);
    }
    total_force(t0 + dt);
    explicit_terms(sp_, a1, a2, f1, f2, k21, k22, w);
    for (std::size_t p = 0; p < nm; ++p)
    {
      u1[p] = e[p] * (u1[p] + 0.5 * dt * k11[p]) + 0.5 * dt * k21[p];
      u2[p] = e[p] * (u2[p] + 0.5 * dt * k12[p]) + 0.5 * dt * k22[p];
    }
  }

  s.u.c[0] = sp_.inverse(u1);
  s.u.c[1] = sp_.inverse(u2);
  s.t += interval;
  s.steps += static_cast<std::uint64_t>(substeps);
  for (const auto &c : s.u.c)
    for (double v : c.values())
      if (!std::isfinite(v)) throw NumericalBlowup(s.steps, 0, "non-finite velocity");
}

double cfl_dt(const VectorField &u, const TorusGrid &grid, double safety, double base_dt, double u_floor)
{
  if (!(safety > 0.0 && safety <= 1.0)) throw Error(ErrorCode::InvalidArgument, "CFL safety must lie in (0, 1]");
  if (!(base_dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "base dt must be positive");
  const double umax = std::max(linf_norm(u), u_floor);
  return std::min(base_dt, safety * grid.dx() / umax);
}

int substeps_for(const VectorField &u, const TorusGrid &grid, double safety, double interval, int min_substeps)
{
  const double limit = cfl_dt(u, grid, safety, interval);
  const int needed = static_cast<int>(std::ceil(interval / limit - 1e-12));
  return std::max({1, min_substeps, needed});
}

double kinetic_energy(const VectorField &u)
{
  const double l2 = lq_norm(u, 2.0);
  return 0.5 * l2 * l2;
}

double divergence_sup(const Spectral &sp, const VectorField &u) { return linf_norm(sp.divergence(u)); }

double gradient_sup(const Spectral &sp, const VectorField &u) { return linf_norm(sp.gradient(u)); }

VectorField taylor_green(int n, double amplitude, double eta, double t)
{
  const TorusGrid g(n);
  VectorField u(n);
  const double a = amplitude * std::exp(-2.0 * eta * t);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
    {
      const double x = g.x(i), y = g.x(j);
      u.c[0](i, j) = a * std::sin(x) * std::cos(y);
      u.c[1](i, j) = -a * std::cos(x) * std::sin(y);
    }
  return u;
}

VectorField random_band_limited(const Spectral &sp, std::uint64_t seed, int band, double amplitude)
{
  const TorusGrid &g = sp.grid();
  if (band < 1 || band > g.cutoff())
    throw Error(ErrorCode::InvalidArgument, "random field band must lie in [1, N/3]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Spectrum psi(g);
  const int h = g.half();
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < h; ++j)
    {
      const int a = g.k1(i), b = g.k2(j);
      const int kmax = std::max(std::abs(a), std::abs(b));
      if (kmax < 1 || kmax > band) continue;
      if (j == 0 && a < 0) continue;
      const double re = normal(rng), im = normal(rng);
      psi(i, j) = Complex(re, im) / static_cast<double>(a * a + b * b);
      if (j == 0) psi(g.n() - i, 0) = std::conj(psi(i, j));
    }
  const auto &k1 = sp.ik(1);
  const auto &k2 = sp.ik(2);
  Spectrum v1(g), v2(g);
  for (std::size_t p = 0; p < psi.size(); ++p)
  {
    v1[p] = times_ik(k2[p], psi[p]);
    v2[p] = -times_ik(k1[p], psi[p]);
  }
  VectorField u;
  u.c[0] = sp.inverse(v1);
  u.c[1] = sp.inverse(v2);
  const double umax = linf_norm(u);
  if (umax > 0.0)
    for (auto &c : u.c)
      for (double &v : c.values()) v *= amplitude / umax;
  return u;
}

}  // namespace memflow
