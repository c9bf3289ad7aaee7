// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "memflow/config.hpp"
#include "memflow/constitutive.hpp"

namespace memflow
{

struct ConvergenceLevel
{
  int n = 0;
  double dt = 0.0;  // flow step
  double ds = 0.0;  // age step
  std::size_t age_nodes = 0;
};

struct ConvergenceReport
{
  std::string name;
  std::vector<ConvergenceLevel> levels;
  std::vector<std::string> quantities;
  /// errors[q][k]: exact-solution error at level k, or the Cauchy difference
  /// between levels k and k + 1 for self-convergence.
  std::vector<std::vector<double>> errors;
  /// Observed order between consecutive entries of errors[q].
  std::vector<std::vector<double>> orders;
  /// Least-squares order over all entries and its RMS residual in log2 units.
  std::vector<double> fitted_order;
  std::vector<double> fit_residual;

  std::size_t quantity(const std::string &name) const;
};

/// Fills orders and the fit from errors, using the step sizes `h` per entry.
void fit_orders(ConvergenceReport &rep, const std::vector<double> &h);

/// Relative L² error of the velocity against the exact Taylor–Green decay at T.
ConvergenceReport taylor_green_decay_study(int n, double eta, double t_final, const std::vector<double> &dts);

/// Flow error against a manufactured band-limited solution with nonlinear
/// interaction, forced by its analytic residual. Quantity "u_l2".
ConvergenceReport manufactured_flow_study(int n, double eta, double t_final, const std::vector<double> &dts);

/// Homogeneous startup shear from the identity history: grid-quadrature tau
/// at time t against the adaptive-quadrature oracle. Quantities tau11, tau12.
ConvergenceReport shear_startup_study(const ConstitutiveModel &model, double gamma_dot, double t,
                                      const std::vector<double> &age_steps, double eps_tail = 1e-10);

/// Self-convergence of the coupled system: `levels` runs of cfg with dt
/// halved each time, N fixed. Quantities u_l2, tau_l2, det_drift, y_final.
ConvergenceReport coupled_self_convergence(const SimulationConfig &cfg, int levels);

/// Relative L² gap between integral and differential Oldroyd-B stress at T,
/// per level with dt halved each time. Quantity "oracle_gap".
ConvergenceReport oracle_gap_study(const SimulationConfig &cfg, int levels);

void print_report(std::ostream &os, const ConvergenceReport &rep);
void write_report_csv(std::ostream &os, const ConvergenceReport &rep);

}  // namespace memflow
