// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/diagnostics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "memflow/error.hpp"
#include "memflow/flow.hpp"
#include "memflow/stress.hpp"

namespace memflow
{

std::string flag_names(unsigned flags)
{
  if (flags == 0) return "none";
  static constexpr std::pair<unsigned, const char *> kNames[] = {
      {kFlagStressBound, "stress_bound"},   {kFlagDeterminant, "determinant"},
      {kFlagNormBound, "norm_bound"},       {kFlagDivergence, "divergence"},
      {kFlagGradientControl, "gradient_control"},
  };
  std::string out;
  for (const auto &[bit, name] : kNames)
    if (flags & bit)
    {
      if (!out.empty()) out += '|';
      out += name;
    }
  return out;
}

// ---------------------------------------------------------------------------

Monitor::Monitor(const Spectral &sp, const AgeGrid &ages, MonitorSettings settings)
  : sp_(sp), ages_(ages), settings_(std::move(settings))
{
  if (!(settings_.mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
}

DiagnosticsRecord Monitor::observe(double t, const VectorField &u, const DeformationHistory &h,
                                   const TensorField2 &tau)
{
  const MonitorSettings &s = settings_;
  DiagnosticsRecord r;
  r.t = t;
  r.stress_sup = linf_norm(tau);
  r.min_detG = min_det(h);
  r.min_absG = min_norm(h);
  r.energy = kinetic_energy(u);
  r.gradu_sup = gradient_sup(sp_, u);
  r.divu_sup = divergence_sup(sp_, u);
  r.y_integrand = y_integrand_now(h, sp_, ages_, s.q, s.r, s.mu);
  r.stress_grad_norm = stress_gradient_norm(tau, sp_, s.q);

  if (memory_.started) memory_.y_value += 0.5 * (t - memory_.t) * (memory_.y_integrand + r.y_integrand);
  memory_.started = true;
  memory_.t = t;
  memory_.y_integrand = r.y_integrand;
  r.y_value = memory_.y_value;

  const double floor = std::min(s.mu, 1.0);
  if (s.s_inf && r.stress_sup > *s.s_inf * (1.0 - s.tail_error) + s.quad_tol + s.stress_tol)
    r.flags |= kFlagStressBound;
  if (r.min_detG < floor - s.det_tol) r.flags |= kFlagDeterminant;
  if (r.min_absG < std::sqrt(2.0 * floor) - s.norm_tol) r.flags |= kFlagNormBound;
  if (!(r.divu_sup <= s.div_tol)) r.flags |= kFlagDivergence;
  if (s.s_prime_inf &&
      std::pow(r.stress_grad_norm, s.r) > std::pow(*s.s_prime_inf, s.r) * r.y_integrand + s.gradient_tol)
    r.flags |= kFlagGradientControl;
  return r;
}

// ---------------------------------------------------------------------------

namespace
{

Mat2 at(const TensorField2 &g, std::size_t p) { return {g.c[0][p], g.c[1][p], g.c[2][p], g.c[3][p]}; }

TensorField2 oracle_rhs(const OracleState &o, const TensorField2 &tau, const Spectral &sp, const Kinematics &k)
{
  const TensorField3 d = sp.gradient(tau);
  TensorField2 out(sp.n());
  for (std::size_t p = 0; p < out.c[0].size(); ++p)
  {
    const Mat2 l = at(k.grad_u, p);
    const Mat2 t = at(tau, p);
    Mat2 v = l.transpose() * t + t * l + (1.0 / o.lambda) * (o.mu_p * (l + l.transpose()) - t);
    const double u1 = k.u.c[0][p], u2 = k.u.c[1][p];
    v.xx -= u1 * d.c[0][p] + u2 * d.c[4][p];
    v.xy -= u1 * d.c[1][p] + u2 * d.c[5][p];
    v.yx -= u1 * d.c[2][p] + u2 * d.c[6][p];
    v.yy -= u1 * d.c[3][p] + u2 * d.c[7][p];
    out.c[0][p] = v.xx;
    out.c[1][p] = v.xy;
    out.c[2][p] = v.yx;
    out.c[3][p] = v.yy;
  }
  return sp.dealias(out);
}

void axpy(TensorField2 &y, double a, const TensorField2 &x)
{
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t p = 0; p < y.c[c].size(); ++p) y.c[c][p] += a * x.c[c][p];
}

}  // namespace

void oldroyd_differential_step(OracleState &o, const Spectral &sp, const Kinematics &from, const Kinematics &mid,
                               const Kinematics &to, double dt)
{
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "oracle step needs dt > 0");
  const TensorField2 k1 = oracle_rhs(o, o.tau, sp, from);
  TensorField2 s = o.tau;
  axpy(s, 0.5 * dt, k1);
  const TensorField2 k2 = oracle_rhs(o, s, sp, mid);
  s = o.tau;
  axpy(s, 0.5 * dt, k2);
  const TensorField2 k3 = oracle_rhs(o, s, sp, mid);
  s = o.tau;
  axpy(s, dt, k3);
  const TensorField2 k4 = oracle_rhs(o, s, sp, to);
  axpy(o.tau, dt / 6.0, k1);
  axpy(o.tau, dt / 3.0, k2);
  axpy(o.tau, dt / 3.0, k3);
  axpy(o.tau, dt / 6.0, k4);
  for (const auto &c : o.tau.c)
    for (double v : c.values())
      if (!std::isfinite(v)) throw NumericalBlowup(0, 0, "non-finite oracle stress");
}

// ---------------------------------------------------------------------------

namespace
{

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

template <class Integrand>
double integrate_checked(Integrand f, double a, double b, double abs_tol)
{
  double err = 0.0;
  double value = 0.0;
  try
  {
    value = GK::integrate(f, a, b, 15, 1e-14, &err);
  }
  catch (const std::exception &e)
  {
    throw Error(ErrorCode::QuadratureFailure, std::string("adaptive quadrature failed: ") + e.what());
  }
  if (!std::isfinite(value) || !std::isfinite(err) || err > abs_tol)
    throw Error(ErrorCode::QuadratureFailure, "adaptive quadrature did not reach the requested tolerance (estimate " +
                                                  std::to_string(err) + ")");
  return value;
}

Mat2 shear_integral(const StrainMeasure &measure, const MemoryKernel &kernel, double gamma_dot, double a, double b,
                    double abs_tol)
{
  auto component = [&](int c) {
    return integrate_checked(
        [&](double s) {
          const Mat2 g{1.0, 0.0, gamma_dot * s, 1.0};
          const Mat2 v = measure.evaluate(g);
          const double comp = c == 0 ? v.xx : c == 1 ? v.xy : c == 2 ? v.yx : v.yy;
          return kernel.density(s) * comp;
        },
        a, b, abs_tol);
  };
  return {component(0), component(1), component(2), component(3)};
}

}  // namespace

Mat2 steady_shear_stress(const StrainMeasure &measure, const MemoryKernel &kernel, double gamma_dot, double abs_tol)
{
  if (!std::isfinite(gamma_dot)) throw Error(ErrorCode::InvalidArgument, "shear rate must be finite");
  return shear_integral(measure, kernel, gamma_dot, 0.0, std::numeric_limits<double>::infinity(), abs_tol);
}

Mat2 startup_shear_stress(const StrainMeasure &measure, const MemoryKernel &kernel, double gamma_dot, double t,
                          double abs_tol)
{
  if (!std::isfinite(gamma_dot)) throw Error(ErrorCode::InvalidArgument, "shear rate must be finite");
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "startup time must be nonnegative");
  Mat2 tau{};
  if (t > 0.0) tau = shear_integral(measure, kernel, gamma_dot, 0.0, t, abs_tol);
  const double tail = kernel.interval_mass(t, std::numeric_limits<double>::infinity());
  return tau + tail * measure.evaluate(Mat2{1.0, 0.0, gamma_dot * t, 1.0});
}

// ---------------------------------------------------------------------------

BoundReport theorem_bound_report(std::span<const DiagnosticsRecord> records, const MonitorSettings &s)
{
  if (records.size() < 10) throw Error(ErrorCode::InvalidArgument, "bound report needs at least 10 records");
  BoundReport rep;
  rep.records = records.size();
  rep.min_det = std::numeric_limits<double>::infinity();
  const double floor = std::min(s.mu, 1.0);
  for (std::size_t i = 0; i < records.size(); ++i)
  {
    const DiagnosticsRecord &r = records[i];
    if (s.s_inf && r.stress_sup > *s.s_inf * (1.0 - s.tail_error) + s.quad_tol + s.stress_tol)
      ++rep.stress_violations;
    if (r.flags != 0) ++rep.flagged_steps;
    rep.min_det = std::min(rep.min_det, r.min_detG);
    rep.max_div = std::max(rep.max_div, r.divu_sup);
    if (!std::isfinite(r.y_value)) rep.y_finite = false;
    if (i > 0 && !(r.y_value >= records[i - 1].y_value)) rep.y_monotone = false;
  }
  rep.det_ok = rep.min_det >= floor - s.det_tol;

  // Least-squares line through (t, ln ln(e + y)).
  double st = 0, sz = 0, stt = 0, stz = 0;
  const double n = static_cast<double>(records.size());
  std::vector<double> z(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
  {
    z[i] = std::log(std::log(M_E + std::max(records[i].y_value, 0.0)));
    st += records[i].t;
    sz += z[i];
    stt += records[i].t * records[i].t;
    stz += records[i].t * z[i];
  }
  const double denom = n * stt - st * st;
  if (denom > 0.0)
  {
    rep.lnln_slope = (n * stz - st * sz) / denom;
    const double icpt = (sz - rep.lnln_slope * st) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i)
    {
      const double e = z[i] - (icpt + rep.lnln_slope * records[i].t);
      ss += e * e;
    }
    rep.lnln_residual = std::sqrt(ss / n);
  }

  if (rep.stress_violations > 0) rep.failures.push_back("stress bound violated");
  if (!rep.det_ok) rep.failures.push_back("determinant below threshold");
  if (!rep.y_monotone) rep.failures.push_back("y not monotone");
  if (!rep.y_finite) rep.failures.push_back("y not finite");
  if (!(rep.max_div <= s.div_tol)) rep.failures.push_back("divergence above tolerance");
  rep.pass = rep.failures.empty();
  return rep;
}

void write_csv_header(std::ostream &os)
{
  os << "t,stress_sup,min_detG,min_absG,energy,gradu_sup,divu_sup,y_value,y_integrand,stress_grad_norm,flags\n";
}

void write_csv_row(std::ostream &os, const DiagnosticsRecord &r)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", r.t, r.stress_sup,
                r.min_detG, r.min_absG, r.energy, r.gradu_sup, r.divu_sup, r.y_value, r.y_integrand,
                r.stress_grad_norm);
  os << buf << flag_names(r.flags) << '\n';
}

}  // namespace memflow
