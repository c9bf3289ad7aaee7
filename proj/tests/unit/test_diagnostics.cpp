// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "memflow/age_grid.hpp"
#include "memflow/constitutive.hpp"
#include "memflow/deformation.hpp"
#include "memflow/diagnostics.hpp"
#include "memflow/error.hpp"
#include "memflow/flow.hpp"
#include "memflow/stress.hpp"

namespace
{

using namespace memflow;

MonitorSettings settings_for(const ConstitutiveModel &m, const AgeGrid &ages)
{
  MonitorSettings s;
  s.s_inf = m.measure.s_inf();
  s.s_prime_inf = m.measure.s_prime_inf();
  s.tail_error = ages.tail_error;
  s.quad_tol = ages.quad_tol;
  return s;
}

TEST(Monitor, QuiescentOldroyd)
{
  const int n = 16;
  const Spectral sp(n);
  const auto m = model_catalog("oldroyd-b");
  const AgeGrid ages = build_age_grid(m.kernel, 0.05, 1e-6);
  Monitor mon(sp, ages, settings_for(m, ages));
  const DeformationHistory h(n, ages.size());
  const TensorField2 tau = assemble_stress(h, m.measure, ages);
  for (int k = 0; k < 3; ++k)
  {
    const DiagnosticsRecord r = mon.observe(0.05 * k, VectorField(n), h, tau);
    EXPECT_EQ(r.stress_sup, 0.0);
    EXPECT_EQ(r.min_detG, 1.0);
    EXPECT_EQ(r.y_value, 0.0);
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.flags, 0u);
  }
}

TEST(Monitor, CorruptSliceFlagsDeterminant)
{
  const int n = 16;
  const Spectral sp(n);
  const auto m = model_catalog("psm-raw");
  const AgeGrid ages = build_age_grid(m.kernel, 0.05, 1e-6);
  Monitor mon(sp, ages, settings_for(m, ages));
  DeformationHistory h(n, ages.size());
  TensorField2 bad(n);
  bad.c[0] = ScalarField(n, 1.0);
  bad.c[1] = ScalarField(n, 1.0);
  bad.c[2] = ScalarField(n, 1.0);
  bad.c[3] = ScalarField(n, 1.0);
  h.set_slice(4, bad);
  const DiagnosticsRecord r = mon.observe(0.0, VectorField(n), h, assemble_stress(h, m.measure, ages));
  EXPECT_EQ(r.min_detG, 0.0);
  EXPECT_TRUE(r.flags & kFlagDeterminant);
  EXPECT_NE(flag_names(r.flags).find("determinant"), std::string::npos);
}

TEST(Monitor, YIsTimeTrapezoid)
{
  const int n = 32;
  const Spectral sp(n);
  const auto m = model_catalog("psm-raw");
  const AgeGrid ages = build_age_grid(m.kernel, 0.05, 1e-6);
  Monitor mon(sp, ages, settings_for(m, ages));
  DeformationHistory h(n, ages.size());
  const VectorField u = taylor_green(n);
  const Kinematics k = make_kinematics(sp, u);
  double y = 0.0, prev_t = 0.0, prev_i = 0.0;
  for (int s = 0; s <= 10; ++s)
  {
    if (s > 0) stretch_advect_step(h, sp, k, k, k, ages.ds);
    const double t = s * ages.ds;
    const DiagnosticsRecord r = mon.observe(t, u, h, assemble_stress(h, m.measure, ages));
    if (s > 0) y += 0.5 * (t - prev_t) * (prev_i + r.y_integrand);
    EXPECT_NEAR(r.y_value, y, 1e-14 * (1 + y));
    EXPECT_GE(r.y_integrand, 0.0);
    EXPECT_EQ(r.flags, 0u);
    prev_t = t;
    prev_i = r.y_integrand;
  }
  EXPECT_GT(y, 0.0);
}

TEST(Oracle, PureRelaxation)
{
  const int n = 16;
  const Spectral sp(n);
  OracleState o;
  o.lambda = 0.5;
  o.tau = TensorField2(n);
  const TorusGrid g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
    {
      o.tau.c[0](i, j) = std::cos(g.x(i));
      o.tau.c[1](i, j) = o.tau.c[2](i, j) = 0.3;
    }
  const TensorField2 tau0 = o.tau;
  const Kinematics rest = make_kinematics(sp, VectorField(n));
  for (int s = 0; s < 100; ++s) oldroyd_differential_step(o, sp, rest, rest, rest, 0.01);
  // Fourth-order stability polynomial of z = -dt / lambda, applied 100 times.
  const double z = -0.01 / o.lambda;
  const double f = std::pow(1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0, 100);
  EXPECT_NEAR(f, std::exp(-1.0 / o.lambda), 1e-6);
  for (int c = 0; c < 4; ++c)
    for (std::size_t p = 0; p < tau0.c[c].size(); ++p) EXPECT_NEAR(o.tau.c[c][p], f * tau0.c[c][p], 1e-14);
}

TEST(Oracle, SteadyShearViscometric)
{
  const int n = 16;
  const Spectral sp(n);
  OracleState o;
  o.lambda = 0.7;
  o.mu_p = 1.3;
  o.tau = TensorField2(n);
  const double gd = 0.9;
  const Kinematics k = homogeneous_kinematics(n, Mat2{0.0, 0.0, gd, 0.0});
  for (int s = 0; s < 4000; ++s) oldroyd_differential_step(o, sp, k, k, k, 0.01);
  EXPECT_NEAR(o.tau.c[1][3], o.mu_p * gd, 1e-10);
  EXPECT_NEAR(o.tau.c[2][3], o.mu_p * gd, 1e-10);
  EXPECT_NEAR(o.tau.c[0][3], 2.0 * o.mu_p * o.lambda * gd * gd, 1e-10);
  EXPECT_NEAR(o.tau.c[3][3], 0.0, 1e-10);
}

TEST(SteadyShear, OldroydClosedForm)
{
  const auto m = model_catalog("oldroyd-b");
  const Mat2 z = steady_shear_stress(m.measure, m.kernel, 0.0);
  EXPECT_EQ(z.frob(), 0.0);
  const Mat2 t = steady_shear_stress(m.measure, m.kernel, 1.0);
  EXPECT_NEAR(t.xx, 2.0, 1e-12);
  EXPECT_NEAR(t.xy, 1.0, 1e-12);
  EXPECT_NEAR(t.yx, 1.0, 1e-12);
  EXPECT_NEAR(t.yy, 0.0, 1e-12);
}

TEST(SteadyShear, PsmOracle)
{
  const auto m = model_catalog("psm-raw");
  const Mat2 t = steady_shear_stress(m.measure, m.kernel, 1.0);
  EXPECT_NEAR(t.xy, 0.175931757623425483, 1e-12);
  EXPECT_NEAR(t.xx, 0.489910640022716394, 1e-12);
  EXPECT_NEAR(t.yy, 0.255044679988641803, 1e-12);
}

TEST(StartupShear, ApproachesSteadyState)
{
  const auto m = model_catalog("oldroyd-b");
  const Mat2 t0 = startup_shear_stress(m.measure, m.kernel, 1.0, 0.0);
  EXPECT_NEAR(t0.frob(), 0.0, 1e-14);
  // tau12(t) = 1 - e^{-t}(1 + t) + t e^{-t} = 1 - e^{-t}.
  const Mat2 t1 = startup_shear_stress(m.measure, m.kernel, 1.0, 1.0);
  EXPECT_NEAR(t1.xy, 1.0 - std::exp(-1.0), 1e-12);
  const Mat2 tl = startup_shear_stress(m.measure, m.kernel, 1.0, 40.0);
  EXPECT_NEAR(tl.xy, 1.0, 1e-12);
  EXPECT_NEAR(tl.xx, 2.0, 1e-12);
}

std::vector<DiagnosticsRecord> quiet_series(std::size_t n)
{
  std::vector<DiagnosticsRecord> v(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    v[i].t = 0.1 * static_cast<double>(i);
    v[i].min_absG = std::sqrt(2.0);
  }
  return v;
}

TEST(BoundReport, Quiescent)
{
  const auto r = theorem_bound_report(quiet_series(20), MonitorSettings{});
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.y_monotone);
  EXPECT_EQ(r.lnln_slope, 0.0);
  EXPECT_THROW(theorem_bound_report(quiet_series(5), MonitorSettings{}), Error);
}

TEST(BoundReport, DetectsBrokenMonotonicity)
{
  auto v = quiet_series(20);
  for (std::size_t i = 0; i < v.size(); ++i) v[i].y_value = static_cast<double>(i);
  v[12].y_value = 3.0;
  const auto r = theorem_bound_report(v, MonitorSettings{});
  EXPECT_FALSE(r.pass);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_EQ(r.failures[0], "y not monotone");
}

TEST(BoundReport, StressAndDeterminant)
{
  auto v = quiet_series(20);
  MonitorSettings s;
  s.s_inf = 1.0;
  v[3].stress_sup = 1.01;
  v[4].min_detG = 0.5;
  const auto r = theorem_bound_report(v, s);
  EXPECT_EQ(r.stress_violations, 1u);
  EXPECT_FALSE(r.det_ok);
  EXPECT_FALSE(r.pass);
}

TEST(Csv, Format)
{
  std::ostringstream os;
  write_csv_header(os);
  DiagnosticsRecord r;
  r.t = 0.1;
  r.flags = kFlagStressBound | kFlagDivergence;
  write_csv_row(os, r);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "t,stress_sup,min_detG,min_absG,energy,gradu_sup,divu_sup,y_value,y_integrand,stress_grad_norm,flags");
  EXPECT_NE(s.find("0.10000000000000001,"), std::string::npos);
  EXPECT_NE(s.find(",stress_bound|divergence\n"), std::string::npos);
}

}  // namespace
