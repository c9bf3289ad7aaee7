// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "memflow/error.hpp"
#include "memflow/expression.hpp"

namespace memflow
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char *what)
{
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive and finite");
}

}  // namespace

// ---------------------------------------------------------------------------
// MemoryKernel

MemoryKernel::MemoryKernel(Family f, std::vector<double> c, std::vector<double> r)
  : family_(f), c_(std::move(c)), r_(std::move(r))
{
}

MemoryKernel MemoryKernel::exponential(double relaxation_time)
{
  require_positive(relaxation_time, "relaxation time");
  return MemoryKernel(Family::SingleExponential, {1.0 / relaxation_time}, {1.0 / relaxation_time});
}

MemoryKernel MemoryKernel::multimode(std::vector<double> weights, std::vector<double> relaxation_times)
{
  if (weights.empty() || weights.size() != relaxation_times.size())
    throw Error(ErrorCode::InvalidArgument, "multimode kernel needs matching non-empty weights and times");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
  {
    require_positive(relaxation_times[k], "relaxation time");
    if (!(weights[k] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mode weights must be nonnegative");
    total += weights[k];
  }
  require_positive(total, "total mode weight");
  std::vector<double> c(weights.size()), r(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k)
  {
    c[k] = weights[k] / total / relaxation_times[k];
    r[k] = 1.0 / relaxation_times[k];
  }
  return MemoryKernel(Family::MultiExponential, std::move(c), std::move(r));
}

MemoryKernel MemoryKernel::doi_edwards(double relaxation_time, int max_mode)
{
  require_positive(relaxation_time, "relaxation time");
  if (max_mode < 1) throw Error(ErrorCode::InvalidArgument, "Doi-Edwards needs at least one mode");
  std::vector<double> weights, times;
  for (int p = 1; p <= max_mode; p += 2)
  {
    const double p2 = static_cast<double>(p) * p;
    weights.push_back(1.0 / p2);
    times.push_back(relaxation_time / p2);
  }
  MemoryKernel k = multimode(std::move(weights), std::move(times));
  k.family_ = Family::DoiEdwards;
  return k;
}

MemoryKernel MemoryKernel::exponential_sum(std::vector<double> coefficients, std::vector<double> rates)
{
  if (coefficients.empty() || coefficients.size() != rates.size())
    throw Error(ErrorCode::InvalidArgument, "exponential sum needs matching coefficients and rates");
  return MemoryKernel(Family::ExponentialSum, std::move(coefficients), std::move(rates));
}

double MemoryKernel::density(double s) const
{
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "memory kernel evaluated at negative age");
  if (singular() && s == 0.0)
    throw Error(ErrorCode::SingularOrigin, "memory kernel is singular at the origin");
  double acc = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k) acc += c_[k] * std::exp(-r_[k] * s);
  return acc;
}

double MemoryKernel::density_derivative(double s) const
{
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "memory kernel evaluated at negative age");
  double acc = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k) acc -= c_[k] * r_[k] * std::exp(-r_[k] * s);
  return acc;
}

double MemoryKernel::interval_mass(double a, double b) const
{
  if (!(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "interval start must be a nonnegative age");
  if (!(a <= b)) throw Error(ErrorCode::InvalidArgument, "interval_mass needs a <= b");
  double acc = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k)
  {
    const double r = r_[k];
    if (r == 0.0)
    {
      acc += c_[k] * (b - a);
      continue;
    }
    if (std::isinf(b))
    {
      acc += r > 0.0 ? c_[k] / r * std::exp(-r * a) : kInf * c_[k];
      continue;
    }
    // exp(-ra) - exp(-rb) = -exp(-ra) expm1(-r(b-a))
    acc += -c_[k] / r * std::exp(-r * a) * std::expm1(-r * (b - a));
  }
  return acc;
}

double MemoryKernel::max_relaxation_time() const
{
  double t = 0.0;
  for (double r : r_)
    if (r > 0.0) t = std::max(t, 1.0 / r);
  return t > 0.0 ? t : 1.0;
}

std::string MemoryKernel::describe() const
{
  std::ostringstream os;
  switch (family_)
  {
  case Family::SingleExponential: os << "exponential(lambda=" << 1.0 / r_[0] << ")"; break;
  case Family::MultiExponential: os << "multimode(" << c_.size() << " modes)"; break;
  case Family::DoiEdwards: os << "doi-edwards(" << c_.size() << " odd modes)"; break;
  case Family::ExponentialSum: os << "exponential-sum(" << c_.size() << " terms)"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// DampingFunction

DampingFunction::DampingFunction(Kind k, double p0, double p1, std::string label)
  : kind_(k), p0_(p0), p1_(p1), label_(std::move(label))
{
}

DampingFunction DampingFunction::rational(double a, double b)
{
  std::ostringstream os;
  os << a << "/(" << b << "+x)";
  return DampingFunction(Kind::Rational, a, b, os.str());
}

DampingFunction DampingFunction::root_exponential(double beta, double c)
{
  std::ostringstream os;
  os << "exp(-" << beta << "*(sqrt(x)-" << c << "))";
  return DampingFunction(Kind::RootExponential, beta, c, os.str());
}

DampingFunction DampingFunction::constant(double value)
{
  std::ostringstream os;
  os << value;
  return DampingFunction(Kind::Constant, value, 0.0, os.str());
}

DampingFunction DampingFunction::custom(std::function<double(double)> h, std::function<double(double)> dh,
                                        std::string label)
{
  DampingFunction d(Kind::Custom, 0.0, 0.0, std::move(label));
  d.h_ = std::move(h);
  d.dh_ = std::move(dh);
  return d;
}

double DampingFunction::operator()(double x) const
{
  switch (kind_)
  {
  case Kind::Rational: return p0_ / (p1_ + x);
  case Kind::RootExponential: return std::exp(-p0_ * (std::sqrt(x) - p1_));
  case Kind::Constant: return p0_;
  case Kind::Custom: return h_(x);
  }
  return 0.0;
}

double DampingFunction::derivative(double x) const
{
  switch (kind_)
  {
  case Kind::Rational: {
    const double d = p1_ + x;
    return -p0_ / (d * d);
  }
  case Kind::RootExponential: {
    const double r = std::sqrt(x);
    if (r == 0.0) return -kInf;
    return -p0_ / (2.0 * r) * std::exp(-p0_ * (r - p1_));
  }
  case Kind::Constant: return 0.0;
  case Kind::Custom: return dh_(x);
  }
  return 0.0;
}

std::optional<double> DampingFunction::known_sup_xh() const
{
  switch (kind_)
  {
  case Kind::Rational:
    if (p1_ >= 0.0) return std::fabs(p0_);
    return std::nullopt;
  case Kind::RootExponential:
    if (p0_ > 0.0) return 4.0 / (p0_ * p0_) * std::exp(-2.0 + p0_ * p1_);
    return std::nullopt;
  case Kind::Constant:
    if (p0_ == 0.0) return 0.0;
    return std::nullopt;
  case Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> DampingFunction::known_sup_x2dh() const
{
  switch (kind_)
  {
  case Kind::Rational:
    if (p1_ >= 0.0) return std::fabs(p0_);
    return std::nullopt;
  case Kind::RootExponential:
    if (p0_ > 0.0) return 27.0 / (2.0 * p0_ * p0_) * std::exp(-3.0 + p0_ * p1_);
    return std::nullopt;
  case Kind::Constant: return 0.0;
  case Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

double central_derivative(const std::function<double(double)> &f, double x)
{
  const double h = x > 0.0 ? 1e-3 * x : 1e-6;
  if (x - 2.0 * h < 0.0)
  {
    // One-sided second-order stencil at the origin.
    return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  }
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
}

// ---------------------------------------------------------------------------
// StrainMeasure

StrainMeasure::StrainMeasure(DampingFunction h, double scale, double shift, std::optional<double> s_inf,
                             std::optional<double> s_prime_inf)
  : h_(std::move(h)), scale_(scale), shift_(shift), s_inf_(s_inf), s_prime_inf_(s_prime_inf)
{
}

StrainMeasure StrainMeasure::damped(DampingFunction h, double scale)
{
  const auto c = h.known_sup_xh();
  const auto cp = h.known_sup_x2dh();
  std::optional<double> s_inf, s_prime;
  if (c && cp)
  {
    s_inf = std::fabs(scale) * *c;
    s_prime = std::fabs(scale) * (2.0 * *cp + std::sqrt(6.0) * *c);
  }
  return StrainMeasure(std::move(h), scale, 0.0, s_inf, s_prime);
}

Mat2 StrainMeasure::evaluate(const Mat2 &g) const
{
  const Mat2 c = g.transpose() * g;
  const double i1 = g.frob2();
  Mat2 s = (scale_ * h_(i1)) * c;
  s.xx -= shift_;
  s.yy -= shift_;
  return s;
}

Mat2 StrainMeasure::derivative(const Mat2 &g, const Mat2 &h) const
{
  const Mat2 c = g.transpose() * g;
  const double i1 = g.frob2();
  const double hv = h_(i1);
  const double gh = ddot(g, h);
  // At G = 0 the h' term vanishes with GᵀG even where h' is singular.
  Mat2 out = (i1 == 0.0 || gh == 0.0) ? Mat2{} : (2.0 * gh * h_.derivative(i1)) * c;
  out += hv * (h.transpose() * g + g.transpose() * h);
  return scale_ * out;
}

Tensor StrainMeasure::jacobian(const Mat2 &g) const
{
  Tensor j(4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
    {
      Mat2 e;
      if (a == 0) (b == 0 ? e.xx : e.xy) = 1.0;
      else (b == 0 ? e.yx : e.yy) = 1.0;
      const Mat2 d = derivative(g, e);
      const std::size_t base = static_cast<std::size_t>(a * 2 + b) * 4;
      j[base + 0] = d.xx;
      j[base + 1] = d.xy;
      j[base + 2] = d.yx;
      j[base + 3] = d.yy;
    }
  return j;
}

// ---------------------------------------------------------------------------
// AgeDependentLaw

AgeDependentLaw::AgeDependentLaw(Fn f, DerivFn df, Bound m1, Bound m2)
  : f_(std::move(f)), df_(std::move(df)), m1_(std::move(m1)), m2_(std::move(m2))
{
}

AgeDependentLaw AgeDependentLaw::from_separable(const MemoryKernel &m, const StrainMeasure &s)
{
  const double s_inf = s.s_inf().value_or(kInf);
  const double s_prime = s.s_prime_inf().value_or(kInf);
  return AgeDependentLaw([m, s](double age, const Mat2 &g) { return m.density(age) * s.evaluate(g); },
                         [m, s](double age, const Mat2 &g, const Mat2 &h) {
                           return m.density(age) * s.derivative(g, h);
                         },
                         [m, s_inf](double age) { return s_inf * m.density(age); },
                         [m, s_prime](double age) { return s_prime * m.density(age); });
}

// ---------------------------------------------------------------------------
// Catalog

namespace
{

DampingFunction custom_damping(const ModelParameters &p)
{
  if (p.damping.empty()) throw ConfigError("damping", "kbkz-custom requires a damping function h(x)");
  const Expression h = Expression::parse(p.damping);
  std::function<double(double)> hf = [h](double x) { return h(x); };
  std::function<double(double)> dh;
  if (!p.damping_derivative.empty())
  {
    const Expression d = Expression::parse(p.damping_derivative);
    // Reject derivatives that disagree with finite differences of h.
    for (int i = 0; i <= 60; ++i)
    {
      const double x = std::pow(10.0, -4.0 + 10.0 * i / 60.0);
      const double fd = central_derivative(hf, x);
      const double an = d(x);
      const double scale = std::fabs(fd) + std::fabs(hf(x)) / std::max(x, 1.0) + 1e-300;
      if (!(std::fabs(fd - an) <= 1e-5 * scale))
        throw ConfigError("damping_derivative",
                          "does not match finite differences of h at x=" + std::to_string(x));
    }
    dh = [d](double x) { return d(x); };
  }
  else
  {
    dh = [hf](double x) { return central_derivative(hf, x); };
  }
  return DampingFunction::custom(std::move(hf), std::move(dh), p.damping);
}

}  // namespace

std::vector<std::string> catalog_names()
{
  return {"oldroyd-b", "psm-raw", "psm-normalized", "wagner-raw", "wagner-normalized", "kbkz-custom",
          "doi-edwards"};
}

ConstitutiveModel model_catalog(std::string_view name, const ModelParameters &p)
{
  if (!(p.relaxation_time > 0.0)) throw ConfigError("relaxation_time", "must be positive");
  if (!(p.polymer_viscosity > 0.0)) throw ConfigError("polymer_viscosity", "must be positive");
  const double modulus = p.polymer_viscosity / p.relaxation_time;

  auto kernel_or_default = [&](MemoryKernel fallback) {
    if (!p.mode_weights.empty() || !p.mode_times.empty())
      return MemoryKernel::multimode(p.mode_weights, p.mode_times);
    return fallback;
  };

  const std::string n(name);
  if (n == "oldroyd-b")
  {
    StrainMeasure s(DampingFunction::constant(1.0), modulus, modulus, std::nullopt, std::nullopt);
    return {n, kernel_or_default(MemoryKernel::exponential(p.relaxation_time)), s};
  }
  if (n == "psm-raw")
  {
    const double a = p.alpha.value_or(1.0);
    if (!(a > 0.0)) throw ConfigError("alpha", "psm-raw needs alpha > 0");
    return {n, kernel_or_default(MemoryKernel::exponential(p.relaxation_time)),
            StrainMeasure::damped(DampingFunction::rational(a, a), modulus)};
  }
  if (n == "psm-normalized")
  {
    const double a = p.alpha.value_or(3.0);
    if (!(a > 2.0)) throw ConfigError("alpha", "psm-normalized needs alpha > 2");
    return {n, kernel_or_default(MemoryKernel::exponential(p.relaxation_time)),
            StrainMeasure::damped(DampingFunction::rational(a, a - 2.0), modulus)};
  }
  if (n == "wagner-raw" || n == "wagner-normalized")
  {
    if (!(p.beta > 0.0)) throw ConfigError("beta", "Wagner damping needs beta > 0");
    const double c = n == "wagner-raw" ? 0.0 : std::sqrt(2.0);
    return {n, kernel_or_default(MemoryKernel::exponential(p.relaxation_time)),
            StrainMeasure::damped(DampingFunction::root_exponential(p.beta, c), modulus)};
  }
  if (n == "doi-edwards")
  {
    const double a = p.alpha.value_or(1.0);
    if (!(a > 0.0)) throw ConfigError("alpha", "doi-edwards damping needs alpha > 0");
    return {n, MemoryKernel::doi_edwards(p.relaxation_time, p.doi_edwards_modes),
            StrainMeasure::damped(DampingFunction::rational(a, a), modulus)};
  }
  if (n == "kbkz-custom")
  {
    DampingFunction h = custom_damping(p);
    const SupEstimate xh = log_grid_sup([&h](double x) { return x * std::fabs(h(x)); });
    const SupEstimate x2dh = log_grid_sup([&h](double x) { return x * x * std::fabs(h.derivative(x)); });
    std::optional<double> s_inf, s_prime;
    if (xh.bounded && x2dh.bounded)
    {
      // Grid estimates carry a small relative slack.
      const double c = xh.value * (1.0 + 1e-6);
      const double cp = x2dh.value * (1.0 + 1e-6);
      s_inf = modulus * c;
      s_prime = modulus * (2.0 * cp + std::sqrt(6.0) * c);
    }
    return {n, kernel_or_default(MemoryKernel::exponential(p.relaxation_time)),
            StrainMeasure(std::move(h), modulus, 0.0, s_inf, s_prime)};
  }
  throw Error(ErrorCode::UnknownModel, "unknown constitutive model '" + n + "'");
}

// ---------------------------------------------------------------------------
// Assumption checks

std::vector<double> h1_sample_ages(const MemoryKernel &kernel, std::size_t count)
{
  count = std::max<std::size_t>(count, 100);
  const double lo = std::log(1e-6);
  const double hi = std::log(50.0 * kernel.max_relaxation_time());
  std::vector<double> ages(count);
  for (std::size_t i = 0; i < count; ++i)
    ages[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return ages;
}

H1Report verify_h1(const MemoryKernel &kernel, std::span<const double> ages, double tol)
{
  H1Report r;
  r.positive = true;
  r.decreasing = true;
  double prev = kInf;
  for (double s : ages)
  {
    const double m = kernel.density(s);
    if (!(m > 0.0)) r.positive = false;
    if (m > prev) r.decreasing = false;
    prev = m;
  }
  const double mass = kernel.interval_mass(0.0, kInf);
  r.mass_error = std::fabs(mass - 1.0);
  r.unit_mass = std::isfinite(mass) && r.mass_error <= tol;
  r.pass = r.positive && r.decreasing && r.unit_mass;
  return r;
}

SupEstimate log_grid_sup(const std::function<double(double)> &f, double xmin, double xmax,
                         std::size_t points)
{
  const double lo = std::log(xmin);
  const double hi = std::log(xmax);
  const auto at = [&](std::size_t i) {
    return std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  };
  SupEstimate best;
  std::size_t imax = 0;
  best.value = -kInf;
  for (std::size_t i = 0; i < points; ++i)
  {
    const double x = at(i);
    const double v = f(x);
    if (!std::isfinite(v)) return {kInf, x, false};
    if (v > best.value)
    {
      best.value = v;
      best.argmax = x;
      imax = i;
    }
  }
  if (imax == points - 1)
  {
    const double tail = f(xmax / 10.0);
    best.bounded = !(best.value > tail * (1.0 + 1e-3));
    return best;
  }
  best.bounded = true;
  if (imax == 0) return best;
  // Golden-section refinement in log x around the grid maximum.
  double a = std::log(at(imax - 1));
  double b = std::log(at(imax + 1));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  for (int it = 0; it < 80; ++it)
  {
    if (fc > fd)
    {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(std::exp(c));
    }
    else
    {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(std::exp(d));
    }
  }
  const double xm = std::exp(0.5 * (a + b));
  const double vm = f(xm);
  if (vm > best.value)
  {
    best.value = vm;
    best.argmax = xm;
  }
  return best;
}

H2Report verify_h2(const StrainMeasure &measure, std::size_t budget, std::uint64_t seed, double tol)
{
  budget = std::max<std::size_t>(budget, 10000);
  H2Report r;
  r.s_inf = measure.s_inf();
  r.s_prime_inf = measure.s_prime_inf();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = std::log(2.0), hi = std::log(1e8);
  for (std::size_t n = 0; n < budget; ++n)
  {
    const double i1 = std::exp(lo + (hi - lo) * unit(rng));
    Mat2 g;
    if (n % 2 == 0)
    {
      g = {normal(rng), normal(rng), normal(rng), normal(rng)};
      g *= std::sqrt(i1 / g.frob2());
    }
    else
    {
      // det G = 1 with a^2 + 1/a^2 = I1.
      const double a2 = 0.5 * (i1 + std::sqrt(i1 * i1 - 4.0));
      const double a = std::sqrt(a2);
      const double th = 2.0 * M_PI * unit(rng), ph = 2.0 * M_PI * unit(rng);
      const Mat2 r1{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};
      const Mat2 r2{std::cos(ph), -std::sin(ph), std::sin(ph), std::cos(ph)};
      g = r1 * Mat2{a, 0.0, 0.0, 1.0 / a} * r2;
    }
    r.s_sup_est = std::max(r.s_sup_est, measure.evaluate(g).frob());
    r.gs_prime_sup_est = std::max(r.gs_prime_sup_est, g.frob() * frobenius_norm(measure.jacobian(g)));
  }

  const DampingFunction &h = measure.damping();
  r.xh = log_grid_sup([&h](double x) { return x * std::fabs(h(x)); });
  r.x2dh = log_grid_sup([&h](double x) { return x * x * std::fabs(h.derivative(x)); });

  const bool bounded = r.xh.bounded && r.x2dh.bounded && measure.shift() == 0.0;
  bool within = false;
  if (r.s_inf && r.s_prime_inf)
  {
    within = r.s_sup_est <= *r.s_inf * (1.0 + tol) + tol &&
             r.gs_prime_sup_est <= *r.s_prime_inf * (1.0 + tol) + tol &&
             std::fabs(measure.scale()) * r.xh.value <= *r.s_inf * (1.0 + tol) + tol;
  }
  r.pass = bounded && within;
  return r;
}

}  // namespace memflow
