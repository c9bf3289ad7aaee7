// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "memflow/age_grid.hpp"
#include "memflow/constitutive.hpp"
#include "memflow/deformation.hpp"
#include "memflow/spectral.hpp"

namespace memflow
{

enum Flag : unsigned
{
  kFlagStressBound = 1u << 0,
  kFlagDeterminant = 1u << 1,
  kFlagNormBound = 1u << 2,
  kFlagDivergence = 1u << 3,
  kFlagGradientControl = 1u << 4,
};

std::string flag_names(unsigned flags);

struct DiagnosticsRecord
{
  double t = 0.0;
  double stress_sup = 0.0;
  double min_detG = 1.0;
  double min_absG = 0.0;
  double energy = 0.0;
  double gradu_sup = 0.0;
  double divu_sup = 0.0;
  double y_value = 0.0;
  double y_integrand = 0.0;
  double stress_grad_norm = 0.0;
  unsigned flags = 0;
};

struct MonitorSettings
{
  double q = 8.0;
  double r = 4.0;
  double mu = 1.0;
  double det_tol = 1e-2;
  double norm_tol = 1e-2;
  double div_tol = 1e-10;
  double stress_tol = 1e-8;
  double gradient_tol = 1e-6;
  std::optional<double> s_inf;
  std::optional<double> s_prime_inf;
  double tail_error = 0.0;
  double quad_tol = 0.0;
};

/// Computes DiagnosticsRecord fields at the end of each step and integrates
/// y(t) by the trapezoid rule in time.
class Monitor
{
public:
  Monitor(const Spectral &sp, const AgeGrid &ages, MonitorSettings settings);

  DiagnosticsRecord observe(double t, const VectorField &u, const DeformationHistory &h, const TensorField2 &tau);

  const MonitorSettings &settings() const noexcept { return settings_; }

  struct Memory
  {
    bool started = false;
    double t = 0.0;
    double y_value = 0.0;
    double y_integrand = 0.0;
  };
  const Memory &memory() const noexcept { return memory_; }
  void restore(const Memory &m) noexcept { memory_ = m; }

private:
  const Spectral &sp_;
  const AgeGrid &ages_;
  MonitorSettings settings_;
  Memory memory_;
};

/// Upper-convected Maxwell stress evolved alongside the integral law.
struct OracleState
{
  TensorField2 tau;
  double lambda = 1.0;
  double mu_p = 1.0;
};

/// Classical RK4 step of d_t tau = -u·∇tau + Lᵀtau + tau L + (mu_p (L + Lᵀ) - tau) / lambda
/// with L_lk = d_l u_k and stage velocities at t, t + dt/2, t + dt/2, t + dt, dealiased.
void oldroyd_differential_step(OracleState &o, const Spectral &sp, const Kinematics &from, const Kinematics &mid,
                               const Kinematics &to, double dt);

/// tau = int_0^inf m(s) S(δ + s L) ds with L21 = gamma_dot, by adaptive
/// Gauss-Kronrod quadrature. Throws QuadratureFailure when the estimated
/// error exceeds abs_tol or the integral diverges.
Mat2 steady_shear_stress(const StrainMeasure &measure, const MemoryKernel &kernel, double gamma_dot,
                         double abs_tol = 1e-10);
/// Startup from rest: history G(s) = δ + min(s, t) L.
Mat2 startup_shear_stress(const StrainMeasure &measure, const MemoryKernel &kernel, double gamma_dot, double t,
                          double abs_tol = 1e-10);

struct BoundReport
{
  std::size_t records = 0;
  std::size_t stress_violations = 0;
  std::size_t flagged_steps = 0;
  double min_det = 1.0;
  double max_div = 0.0;
  bool det_ok = true;
  bool y_monotone = true;
  bool y_finite = true;
  double lnln_slope = 0.0;
  double lnln_residual = 0.0;
  std::vector<std::string> failures;
  bool pass = false;
};

/// Checks a time series against the proved bounds. The slope of
/// ln ln(e + y) against t is reported only.
BoundReport theorem_bound_report(std::span<const DiagnosticsRecord> records, const MonitorSettings &settings);

void write_csv_header(std::ostream &os);
void write_csv_row(std::ostream &os, const DiagnosticsRecord &r);

}  // namespace memflow
