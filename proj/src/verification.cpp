// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "memflow/age_grid.hpp"
#include "memflow/deformation.hpp"
#include "memflow/diagnostics.hpp"
#include "memflow/error.hpp"
#include "memflow/flow.hpp"
#include "memflow/simulation.hpp"
#include "memflow/spectral.hpp"
#include "memflow/stress.hpp"

namespace memflow
{

namespace
{

template <std::size_t C>
double relative_l2(const FieldN<C> &a, const FieldN<C> &b)
{
  FieldN<C> d = a;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t p = 0; p < d.c[c].size(); ++p) d.c[c][p] -= b.c[c][p];
  const double den = lq_norm(b, 2.0);
  return den > 0.0 ? lq_norm(d, 2.0) / den : lq_norm(d, 2.0);
}

template <std::size_t C>
double l2_difference(const FieldN<C> &a, const FieldN<C> &b)
{
  FieldN<C> d = a;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t p = 0; p < d.c[c].size(); ++p) d.c[c][p] -= b.c[c][p];
  return lq_norm(d, 2.0);
}

void require_levels(std::size_t k, std::size_t min)
{
  if (k < min)
    throw Error(ErrorCode::InvalidArgument, "convergence study needs at least " + std::to_string(min) + " levels");
}

// (sin 2 x2, 0)
VectorField shear_mode(int n)
{
  const TorusGrid g(n);
  VectorField s(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.c[0](i, j) = std::sin(2.0 * g.x(j));
  return s;
}

VectorField combine(double a, const VectorField &x, double b, const VectorField &y)
{
  VectorField out = x;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t p = 0; p < out.c[c].size(); ++p) out.c[c][p] = a * x.c[c][p] + b * y.c[c][p];
  return out;
}

}  // namespace

std::size_t ConvergenceReport::quantity(const std::string &q) const
{
  for (std::size_t i = 0; i < quantities.size(); ++i)
    if (quantities[i] == q) return i;
  throw Error(ErrorCode::InvalidArgument, "report has no quantity " + q);
}

void fit_orders(ConvergenceReport &rep, const std::vector<double> &h)
{
  rep.orders.assign(rep.quantities.size(), {});
  rep.fitted_order.assign(rep.quantities.size(), std::numeric_limits<double>::quiet_NaN());
  rep.fit_residual.assign(rep.quantities.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t q = 0; q < rep.quantities.size(); ++q)
  {
    const auto &e = rep.errors[q];
    for (std::size_t k = 0; k + 1 < e.size(); ++k)
      rep.orders[q].push_back(std::log(e[k] / e[k + 1]) / std::log(h[k] / h[k + 1]));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < e.size(); ++k)
    {
      if (!(e[k] > 0.0)) continue;
      const double x = std::log2(h[k]), y = std::log2(e[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    const double den = m * sxx - sx * sx;
    if (m >= 2 && den > 0.0)
    {
      const double slope = (m * sxy - sx * sy) / den;
      const double icpt = (sy - slope * sx) / m;
      double ss = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k)
      {
        if (!(e[k] > 0.0)) continue;
        const double r = std::log2(e[k]) - (icpt + slope * std::log2(h[k]));
        ss += r * r;
      }
      rep.fitted_order[q] = slope;
      rep.fit_residual[q] = std::sqrt(ss / m);
    }
  }
}

ConvergenceReport taylor_green_decay_study(int n, double eta, double t_final, const std::vector<double> &dts)
{
  require_levels(dts.size(), 1);
  ConvergenceReport rep;
  rep.name = "taylor-green decay";
  rep.quantities = {"u_l2"};
  rep.errors.assign(1, {});
  const Spectral sp(n);
  const FlowStepper stepper(sp, eta);
  const TensorField2 tau(n);
  for (double dt : dts)
  {
    const auto steps = static_cast<int>(std::llround(t_final / dt));
    FlowState s;
    s.u = taylor_green(n, 1.0);
    stepper.advance(s, tau, t_final, steps);
    rep.levels.push_back({n, dt, 0.0, 0});
    rep.errors[0].push_back(relative_l2(s.u, taylor_green(n, 1.0, eta, t_final)));
  }
  fit_orders(rep, dts);
  return rep;
}

ConvergenceReport manufactured_flow_study(int n, double eta, double t_final, const std::vector<double> &dts)
{
  require_levels(dts.size(), 1);
  ConvergenceReport rep;
  rep.name = "manufactured flow";
  rep.quantities = {"u_l2"};
  rep.errors.assign(1, {});
  const Spectral sp(n);
  const VectorField tg = taylor_green(n, 1.0);
  const VectorField sh = shear_mode(n);
  // u*(t) = a(t) TG + b(t) S with a = 1 + sin(t)/2, b = cos(t)/2.
  auto a = [](double t) { return 1.0 + 0.5 * std::sin(t); };
  auto da = [](double t) { return 0.5 * std::cos(t); };
  auto b = [](double t) { return 0.5 * std::cos(t); };
  auto db = [](double t) { return -0.5 * std::sin(t); };
  auto exact = [&](double t) { return combine(a(t), tg, b(t), sh); };

  FlowStepper stepper(sp, eta);
  stepper.set_forcing([&](double t) {
    const VectorField u = exact(t);
    // f = d_t u* + u*·∇u* - eta Δu*; ΔTG = -2 TG, ΔS = -4 S.
    VectorField f = combine(da(t) + 2.0 * eta * a(t), tg, db(t) + 4.0 * eta * b(t), sh);
    const TensorField2 l = sp.gradient(u);
    for (std::size_t p = 0; p < f.c[0].size(); ++p)
    {
      f.c[0][p] += u.c[0][p] * l.c[0][p] + u.c[1][p] * l.c[2][p];
      f.c[1][p] += u.c[0][p] * l.c[1][p] + u.c[1][p] * l.c[3][p];
    }
    return f;
  });
  const TensorField2 tau(n);
  for (double dt : dts)
  {
    const auto steps = static_cast<int>(std::llround(t_final / dt));
    FlowState s;
    s.u = exact(0.0);
    stepper.advance(s, tau, t_final, steps);
    rep.levels.push_back({n, dt, 0.0, 0});
    rep.errors[0].push_back(relative_l2(s.u, exact(t_final)));
  }
  fit_orders(rep, dts);
  return rep;
}

ConvergenceReport shear_startup_study(const ConstitutiveModel &model, double gamma_dot, double t,
                                      const std::vector<double> &age_steps, double eps_tail)
{
  require_levels(age_steps.size(), 1);
  ConvergenceReport rep;
  rep.name = "shear startup (" + model.name + ")";
  rep.quantities = {"tau11", "tau12"};
  rep.errors.assign(2, {});
  constexpr int n = 16;
  const Spectral sp(n);
  const Kinematics kin = homogeneous_kinematics(n, Mat2{0.0, 0.0, gamma_dot, 0.0});
  const Mat2 oracle = startup_shear_stress(model.measure, model.kernel, gamma_dot, t);
  for (double ds : age_steps)
  {
    const AgeGrid ages = build_age_grid(model.kernel, ds, eps_tail);
    DeformationHistory h(n, ages.size());
    const auto steps = std::llround(t / ds);
    for (long long k = 0; k < steps; ++k) stretch_advect_step(h, sp, kin, kin, kin, ds);
    const TensorField2 tau = assemble_stress(h, model.measure, ages);
    rep.levels.push_back({n, ds, ds, ages.size()});
    rep.errors[0].push_back(std::fabs(tau.c[0][0] - oracle.xx));
    rep.errors[1].push_back(std::fabs(tau.c[1][0] - oracle.xy));
  }
  fit_orders(rep, age_steps);
  return rep;
}

namespace
{

struct LevelResult
{
  VectorField u;
  TensorField2 tau;
  double det_drift = 0.0;
  double y_final = 0.0;
  double gap = 0.0;
  ConvergenceLevel level;
};

LevelResult run_level(SimulationConfig c)
{
  c.write_files = false;
  Simulation sim(c);
  const RunOutcome out = sim.run();
  if (out.exit_code != kExitOk)
    throw Error(ErrorCode::NumericalBlowup, "convergence level failed: " + out.message);
  LevelResult r;
  r.u = sim.flow().u;
  r.tau = sim.stress();
  double md = 1.0;
  for (const auto &rec : out.records) md = std::min(md, rec.min_detG);
  r.det_drift = 1.0 - md;
  r.y_final = out.records.back().y_value;
  if (sim.has_oracle()) r.gap = sim.oracle_gap();
  r.level = {c.n, c.dt / c.substeps, c.dt, sim.ages().size()};
  return r;
}

}  // namespace

ConvergenceReport coupled_self_convergence(const SimulationConfig &cfg, int levels)
{
  require_levels(static_cast<std::size_t>(std::max(levels, 0)), 3);
  ConvergenceReport rep;
  rep.name = "coupled self-convergence (" + cfg.model + ")";
  rep.quantities = {"u_l2", "tau_l2", "det_drift", "y_final"};
  rep.errors.assign(4, {});
  std::vector<LevelResult> runs;
  for (int l = 0; l < levels; ++l)
  {
    SimulationConfig c = cfg;
    c.dt = cfg.dt / std::ldexp(1.0, l);
    runs.push_back(run_level(c));
    rep.levels.push_back(runs.back().level);
  }
  std::vector<double> h;
  for (int l = 0; l + 1 < levels; ++l)
  {
    rep.errors[0].push_back(l2_difference(runs[l].u, runs[l + 1].u));
    rep.errors[1].push_back(l2_difference(runs[l].tau, runs[l + 1].tau));
    rep.errors[2].push_back(std::fabs(runs[l].det_drift - runs[l + 1].det_drift));
    rep.errors[3].push_back(std::fabs(runs[l].y_final - runs[l + 1].y_final));
    h.push_back(runs[l].level.ds);
  }
  fit_orders(rep, h);
  // Raw det drift per level, for the monotonicity check.
  rep.quantities.push_back("det_drift_level");
  rep.errors.push_back({});
  std::vector<double> hl;
  for (const auto &r : runs)
  {
    rep.errors.back().push_back(r.det_drift);
    hl.push_back(r.level.ds);
  }
  ConvergenceReport tmp;
  tmp.quantities = {"x"};
  tmp.errors = {rep.errors.back()};
  fit_orders(tmp, hl);
  rep.orders.push_back(tmp.orders[0]);
  rep.fitted_order.push_back(tmp.fitted_order[0]);
  rep.fit_residual.push_back(tmp.fit_residual[0]);
  return rep;
}

ConvergenceReport oracle_gap_study(const SimulationConfig &cfg, int levels)
{
  require_levels(static_cast<std::size_t>(std::max(levels, 0)), 1);
  ConvergenceReport rep;
  rep.name = "integral vs differential Oldroyd-B";
  rep.quantities = {"oracle_gap"};
  rep.errors.assign(1, {});
  std::vector<double> h;
  for (int l = 0; l < levels; ++l)
  {
    SimulationConfig c = cfg;
    c.oracle = true;
    c.dt = cfg.dt / std::ldexp(1.0, l);
    const LevelResult r = run_level(c);
    rep.levels.push_back(r.level);
    rep.errors[0].push_back(r.gap);
    h.push_back(r.level.ds);
  }
  fit_orders(rep, h);
  return rep;
}

void print_report(std::ostream &os, const ConvergenceReport &rep)
{
  char buf[256];
  os << rep.name << '\n';
  std::snprintf(buf, sizeof buf, "  %-6s %-12s %-12s %-10s\n", "N", "dt", "ds", "ages");
  os << buf;
  for (const auto &l : rep.levels)
  {
    std::snprintf(buf, sizeof buf, "  %-6d %-12.4e %-12.4e %-10zu\n", l.n, l.dt, l.ds, l.age_nodes);
    os << buf;
  }
  for (std::size_t q = 0; q < rep.quantities.size(); ++q)
  {
    os << "  " << rep.quantities[q] << ":";
    for (double e : rep.errors[q])
    {
      std::snprintf(buf, sizeof buf, " %.3e", e);
      os << buf;
    }
    os << "  orders:";
    for (double o : rep.orders[q])
    {
      std::snprintf(buf, sizeof buf, " %.2f", o);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "  fit %.2f (residual %.2g)\n", rep.fitted_order[q], rep.fit_residual[q]);
    os << buf;
  }
}

void write_report_csv(std::ostream &os, const ConvergenceReport &rep)
{
  os << "quantity,index,error,order\n";
  char buf[256];
  for (std::size_t q = 0; q < rep.quantities.size(); ++q)
    for (std::size_t k = 0; k < rep.errors[q].size(); ++k)
    {
      const double order = k < rep.orders[q].size() ? rep.orders[q][k] : std::numeric_limits<double>::quiet_NaN();
      std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g\n", rep.quantities[q].c_str(), k, rep.errors[q][k], order);
      os << buf;
    }
}

}  // namespace memflow
