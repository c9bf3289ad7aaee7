// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <omp.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "memflow/age_grid.hpp"
#include "memflow/config.hpp"
#include "memflow/constitutive.hpp"
#include "memflow/deformation.hpp"
#include "memflow/diagnostics.hpp"
#include "memflow/simulation.hpp"
#include "memflow/stress.hpp"
#include "memflow/tensor.hpp"
#include "memflow/verification.hpp"

namespace
{

using namespace memflow;

struct Verdict
{
  explicit Verdict(std::string name) : id(std::move(name)) {}

  std::string id;
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what)
  {
    if (!ok)
    {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char *f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Taylor-Green flow, amplitude 1, viscosity 0.05. Base step 0.01 equals the
// age step; ten flow substeps give a flow step of 1e-3.
std::string flow_ini(int n, double t_final, const std::string &model_section, double eps_tail)
{
  std::ostringstream os;
  os.precision(17);
  os << "[grid]\nN = " << n << "\n[time]\ndt = 0.01\nT = " << t_final << "\nsubsteps = 10\n"
     << "[fluid]\neta = 0.05\n[model]\n"
     << model_section << "[memory]\neps_tail = " << eps_tail << "\n[analysis]\nq = 8\nr = 4\n"
     << "[initial]\nvelocity = taylor-green\namplitude = 1\nhistory = identity\n"
     << "[output]\nwrite_files = false\n";
  return os.str();
}

struct RunSummary
{
  std::string label;
  int exit_code = 0;
  std::vector<DiagnosticsRecord> records;
  MonitorSettings settings;
  double tail_error = 0.0;
  double oracle_gap = std::numeric_limits<double>::quiet_NaN();
  std::string csv;
};

RunSummary run(const std::string &label, const SimulationConfig &cfg)
{
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(cfg);
  std::ostringstream csv;
  const RunOutcome out = sim.run(&csv);
  RunSummary s;
  s.label = label;
  s.exit_code = out.exit_code;
  s.records = out.records;
  s.settings = sim.monitor_settings();
  s.tail_error = sim.ages().tail_error;
  if (sim.has_oracle()) s.oracle_gap = sim.oracle_gap();
  s.csv = csv.str();
  std::printf("  run %-24s N=%-4d dt=%-8g steps=%-6zu exit=%d  %.1fs\n", label.c_str(), cfg.n, cfg.dt,
              s.records.size() - 1, s.exit_code, elapsed(t0));
  std::fflush(stdout);
  return s;
}

double det_deviation(const RunSummary &s)
{
  double m = 0.0;
  for (const auto &r : s.records) m = std::max(m, 1.0 - r.min_detG);
  return m;
}

double min_norm(const RunSummary &s)
{
  double m = std::numeric_limits<double>::infinity();
  for (const auto &r : s.records) m = std::min(m, r.min_absG);
  return m;
}

void report(const Verdict &v)
{
  std::printf("%s %s%s%s\n", v.id.c_str(), v.pass ? "PASS" : "FAIL", v.detail.empty() ? "" : "  ", v.detail.c_str());
  std::fflush(stdout);
}

// Stress bound: ‖τ‖∞ ≤ S∞ (1 - tail_error) + 1e-8 at every step.
Verdict stress_bound(const RunSummary &psm)
{
  Verdict v{"AC-1"};
  v.require(psm.exit_code == kExitOk, "run exit code " + std::to_string(psm.exit_code));
  const double s_inf = psm.settings.s_inf.value_or(std::numeric_limits<double>::quiet_NaN());
  v.require(s_inf == 1.0, "S_inf = " + fmt("%.6g", s_inf));
  const double bound = s_inf * (1.0 - psm.tail_error) + 1e-8;
  std::size_t violations = 0;
  double worst = 0.0;
  for (const auto &r : psm.records)
  {
    violations += !(r.stress_sup <= bound);
    worst = std::max(worst, r.stress_sup);
  }
  v.require(violations == 0, std::to_string(violations) + " steps above the bound");
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("max |tau| ") + fmt("%.6f", worst) + " <= " +
              fmt("%.10f", bound) + ", " + std::to_string(psm.records.size()) + " steps";
  return v;
}

// Determinant transport: det G ≥ 1 - 1e-2, |G| ≥ √2 - 1e-2, and the det
// deviation shrinks at least fourfold when N doubles.
Verdict determinant(const RunSummary &coarse, const RunSummary &fine)
{
  Verdict v{"AC-2"};
  const double dc = det_deviation(coarse), df = det_deviation(fine);
  for (const RunSummary *s : {&coarse, &fine})
  {
    v.require(s->exit_code == kExitOk, s->label + " exit code " + std::to_string(s->exit_code));
    v.require(det_deviation(*s) <= 1e-2, s->label + " det deviation " + fmt("%.3e", det_deviation(*s)));
    v.require(min_norm(*s) >= std::sqrt(2.0) - 1e-2, s->label + " min |G| " + fmt("%.8f", min_norm(*s)));
  }
  const double ratio = df > 0.0 ? dc / df : std::numeric_limits<double>::infinity();
  v.require(ratio >= 4.0, "deviation ratio N=128/N=256 " + fmt("%.3f", ratio) + " < 4");
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("det deviation ") + fmt("%.3e", dc) + " (N=128), " +
              fmt("%.3e", df) + " (N=256), ratio " + fmt("%.3f", ratio) + ", min |G| " +
              fmt("%.8f", std::min(min_norm(coarse), min_norm(fine)));
  return v;
}

// Integral and differential Oldroyd-B stress agree to 1e-3 at t = 1 and the
// gap shrinks monotonically over three (dt, ds) levels.
Verdict oracle_equivalence(const std::vector<RunSummary> &levels)
{
  Verdict v{"AC-3"};
  std::string gaps;
  for (std::size_t k = 0; k < levels.size(); ++k)
  {
    const auto &s = levels[k];
    v.require(s.exit_code == kExitOk, s.label + " exit code " + std::to_string(s.exit_code));
    v.require(s.oracle_gap <= 1e-3, s.label + " gap " + fmt("%.3e", s.oracle_gap));
    if (k > 0) v.require(s.oracle_gap < levels[k - 1].oracle_gap, "gap not decreasing at " + s.label);
    gaps += (gaps.empty() ? "" : " ") + fmt("%.3e", s.oracle_gap);
  }
  v.require(levels.size() == 3, "expected three levels");
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("gaps ") + gaps;
  return v;
}

TensorField2 uniform(int n, const Mat2 &m)
{
  TensorField2 t(n);
  t.c[0] = ScalarField(n, m.xx);
  t.c[1] = ScalarField(n, m.xy);
  t.c[2] = ScalarField(n, m.yx);
  t.c[3] = ScalarField(n, m.yy);
  return t;
}

// Steady homogeneous shear, γ̇ = 1: the history is G(s) = δ + s L with L21 = 1.
Verdict viscometric()
{
  Verdict v{"AC-4"};
  const int n = 16;
  const double ds = 2e-3;
  auto steady = [&](const ConstitutiveModel &m, const AgeGrid &ages) {
    DeformationHistory h(n, ages.size());
    for (std::size_t j = 1; j < ages.size(); ++j) h.set_slice(j, uniform(n, {1.0, 0.0, ages.nodes[j], 1.0}));
    return assemble_stress(h, m.measure, ages);
  };

  const auto ob = model_catalog("oldroyd-b");
  const AgeGrid ob_ages = build_age_grid(ob.kernel, ds, 1e-10);
  const TensorField2 t_ob = steady(ob, ob_ages);
  const double tol = 1e-6 + ob_ages.tail_error;
  const double e12 = std::fabs(t_ob.c[1][0] - 1.0), e21 = std::fabs(t_ob.c[2][0] - 1.0);
  const double e11 = std::fabs(t_ob.c[0][0] - 2.0), e22 = std::fabs(t_ob.c[3][0]);
  v.require(e12 <= tol && e21 <= tol, "Oldroyd-B tau12 error " + fmt("%.3e", std::max(e12, e21)));
  v.require(e11 <= tol, "Oldroyd-B tau11 error " + fmt("%.3e", e11));
  v.require(e22 <= tol, "Oldroyd-B tau22 error " + fmt("%.3e", e22));

  const auto psm = model_catalog("psm-raw");
  const AgeGrid psm_ages = build_age_grid(psm.kernel, ds, 1e-10);
  const TensorField2 t_psm = steady(psm, psm_ages);
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double oracle = GK::integrate([](double s) { return std::exp(-s) * s / (3.0 + s * s); }, 0.0,
                                      std::numeric_limits<double>::infinity(), 15, 1e-14);
  const double ep = std::fabs(t_psm.c[1][0] - oracle);
  v.require(ep <= 1e-6, "PSM tau12 error " + fmt("%.3e", ep));
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("Oldroyd-B tau12 ") + fmt("%.10f", t_ob.c[1][0]) +
              " tau11 " + fmt("%.10f", t_ob.c[0][0]) + ", PSM tau12 " + fmt("%.10f", t_psm.c[1][0]) + " vs " +
              fmt("%.10f", oracle);
  return v;
}

Verdict assumption_certification()
{
  Verdict v{"AC-5"};
  const H2Report psm = verify_h2(model_catalog("psm-raw").measure);
  const H2Report wag = verify_h2(model_catalog("wagner-raw").measure);
  const auto ob = model_catalog("oldroyd-b");
  const H2Report obr = verify_h2(ob.measure);
  const double w1 = 4.0 * std::exp(-2.0), w2 = 13.5 * std::exp(-3.0);
  v.require(psm.xh.bounded && std::fabs(psm.xh.value - 1.0) <= 1e-3, "PSM sup x|h| " + fmt("%.6f", psm.xh.value));
  v.require(psm.pass, "PSM check failed");
  v.require(wag.xh.bounded && std::fabs(wag.xh.value - w1) <= 1e-3, "Wagner sup x|h| " + fmt("%.6f", wag.xh.value));
  v.require(wag.x2dh.bounded && std::fabs(wag.x2dh.value - w2) <= 1e-3,
            "Wagner sup x^2|h'| " + fmt("%.6f", wag.x2dh.value));
  v.require(wag.pass, "Wagner check failed");
  v.require(!ob.measure.h2_satisfied() && !obr.pass, "Oldroyd-B not flagged");
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("PSM sup x|h| ") + fmt("%.6f", psm.xh.value) +
              ", Wagner sup x|h| " + fmt("%.6f", wag.xh.value) + " sup x^2|h'| " + fmt("%.6f", wag.x2dh.value) +
              ", Oldroyd-B h2_satisfied=false";
  return v;
}

Verdict cauchy_schwarz()
{
  Verdict v{"AC-6"};
  const TensorPropertyReport r = tensor_property_suite(10000, 2024, 1e-12);
  v.require(r.trials == 10000, "trials " + std::to_string(r.trials));
  v.require(r.cauchy_schwarz_violations == 0, std::to_string(r.cauchy_schwarz_violations) + " violations");
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(r.trials) + " trials, worst ratio " +
              fmt("%.15f", r.cauchy_schwarz_worst);
  return v;
}

// ‖∇τ‖_{L^q}^r ≤ S′∞^r y_integrand + 1e-6 at every logged step.
Verdict gradient_control(const RunSummary &psm)
{
  Verdict v{"AC-7"};
  const double r = psm.settings.r;
  const double sp = psm.settings.s_prime_inf.value_or(std::numeric_limits<double>::quiet_NaN());
  v.require(psm.settings.q == 8.0 && r == 4.0, "exponents differ from q = 8, r = 4");
  std::size_t violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto &rec : psm.records)
  {
    const double lhs = std::pow(rec.stress_grad_norm, r);
    const double rhs = std::pow(sp, r) * rec.y_integrand + 1e-6;
    violations += !(lhs <= rhs);
    worst = std::max(worst, lhs - rhs);
  }
  v.require(std::isfinite(sp), "S'_inf unavailable");
  v.require(violations == 0, std::to_string(violations) + " violating steps");
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(psm.records.size()) +
              " steps, max (lhs - rhs) " + fmt("%.3e", worst);
  return v;
}

Verdict y_functional(const std::vector<const RunSummary *> &runs)
{
  Verdict v{"AC-8"};
  std::string slopes;
  for (const RunSummary *s : runs)
  {
    if (s->records.empty())
    {
      v.require(false, s->label + " has no records");
      continue;
    }
    v.require(s->records.front().y_value == 0.0, s->label + " y(0) != 0");
    bool mono = true, finite = true;
    for (std::size_t k = 0; k < s->records.size(); ++k)
    {
      finite = finite && std::isfinite(s->records[k].y_value);
      if (k > 0) mono = mono && s->records[k].y_value >= s->records[k - 1].y_value;
    }
    v.require(mono, s->label + " y decreases");
    v.require(finite, s->label + " y not finite");
    const BoundReport b = theorem_bound_report(s->records, s->settings);
    slopes += (slopes.empty() ? "" : ", ") + s->label + " " + fmt("%.4f", b.lnln_slope);
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::string("ln ln(e+y) slope: ") + slopes;
  return v;
}

Verdict solver_fidelity(const std::vector<const RunSummary *> &runs)
{
  Verdict v{"AC-9"};
  double worst = 0.0;
  for (double eta : {0.05, 1.0})
  {
    const ConvergenceReport tg = taylor_green_decay_study(64, eta, 1.0, {1e-3});
    const double e = tg.errors[0][0];
    worst = std::max(worst, e);
    v.require(e <= 1e-4, "Taylor-Green relative error " + fmt("%.3e", e) + " at eta " + fmt("%g", eta));
  }

  double max_div = 0.0;
  for (const RunSummary *s : runs)
    for (const auto &r : s->records)
    {
      max_div = std::max(max_div, r.divu_sup);
      if (!(r.divu_sup <= 1e-10))
      {
        v.require(false, s->label + " div u " + fmt("%.3e", r.divu_sup) + " at t " + fmt("%g", r.t));
        break;
      }
    }

  SimulationConfig cfg = parse_config_string(flow_ini(64, 0.2, "name = psm-raw\n", 1e-6));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const RunSummary one = run("threads-1", cfg);
  omp_set_num_threads(2);
  const RunSummary two = run("threads-2", cfg);
  omp_set_num_threads(saved);
  v.require(!one.csv.empty() && one.csv == two.csv, "CSV differs between 1 and 2 threads");

  v.detail += (v.detail.empty() ? "" : "; ") + std::string("Taylor-Green error ") + fmt("%.3e", worst) +
              ", max div u " + fmt("%.3e", max_div) + ", CSV " + std::to_string(one.csv.size()) +
              " bytes identical across thread counts";
  return v;
}

}  // namespace

int main()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Verdict> verdicts;
  auto record = [&](Verdict v) {
    report(v);
    verdicts.push_back(std::move(v));
  };

  try
  {
    record(viscometric());
    record(assumption_certification());
    record(cauchy_schwarz());

    std::vector<RunSummary> oracle_levels;
    for (double dt : {0.01, 0.005, 0.0025})
    {
      SimulationConfig c = parse_config_string(flow_ini(64, 1.0, "name = oldroyd-b\nrelaxation_time = 1\n"
                                                                 "polymer_viscosity = 1\n", 1e-8));
      c.dt = dt;
      c.oracle = true;
      oracle_levels.push_back(run("oldroyd-oracle dt=" + fmt("%g", dt), c));
    }
    record(oracle_equivalence(oracle_levels));

    const RunSummary psm128 = run("psm N=128", parse_config_string(flow_ini(128, 2.0, "name = psm-raw\n", 1e-6)));
    record(stress_bound(psm128));
    record(gradient_control(psm128));
    const RunSummary psm256 = run("psm N=256", parse_config_string(flow_ini(256, 2.0, "name = psm-raw\n", 1e-6)));
    record(determinant(psm128, psm256));

    std::vector<const RunSummary *> all = {&psm128, &psm256};
    for (const auto &s : oracle_levels) all.push_back(&s);
    record(y_functional(all));
    record(solver_fidelity(all));
  }
  catch (const std::exception &e)
  {
    std::printf("error: %s\n", e.what());
    return 1;
  }

  std::size_t failed = 0;
  for (const auto &v : verdicts) failed += !v.pass;
  std::printf("acceptance: %zu/%zu criteria passed in %.0fs\n", verdicts.size() - failed, verdicts.size(),
              elapsed(t0));
  return failed == 0 && verdicts.size() == 9 ? 0 : 1;
}
