// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memflow/tensor.hpp"

namespace memflow
{

/// Memory density m(s) represented as a finite exponential sum
/// m(s) = sum_k c_k exp(-r_k s). Every bundled family reduces to this form,
/// so masses and tails are available in closed form.
class MemoryKernel
{
public:
  enum class Family
  {
    SingleExponential,
    MultiExponential,
    DoiEdwards,
    ExponentialSum,  // unnormalized, unchecked; used for constructing counterexamples
  };

  /// m(s) = exp(-s/lambda)/lambda.
  static MemoryKernel exponential(double relaxation_time = 1.0);

  /// m(s) = sum_k g_k/lambda_k exp(-s/lambda_k), with g rescaled to unit sum.
  static MemoryKernel multimode(std::vector<double> weights, std::vector<double> relaxation_times);

  /// Odd modes p <= max_mode with weight proportional to 1/p^2 and time lambda/p^2,
  /// renormalized to unit mass. Evaluating the density at s = 0 is rejected.
  static MemoryKernel doi_edwards(double relaxation_time = 1.0, int max_mode = 31);

  static MemoryKernel exponential_sum(std::vector<double> coefficients, std::vector<double> rates);

  double density(double s) const;
  double density_derivative(double s) const;

  /// Closed-form integral of m over [a, b]; b may be +infinity.
  double interval_mass(double a, double b) const;

  Family family() const noexcept { return family_; }
  bool singular() const noexcept { return family_ == Family::DoiEdwards; }
  double max_relaxation_time() const;
  std::span<const double> coefficients() const noexcept { return c_; }
  std::span<const double> rates() const noexcept { return r_; }
  std::string describe() const;

private:
  MemoryKernel(Family f, std::vector<double> c, std::vector<double> r);

  Family family_;
  std::vector<double> c_;
  std::vector<double> r_;
};

/// Scalar damping function h(I1) of a separable law.
class DampingFunction
{
public:
  /// h(x) = a / (b + x)
  static DampingFunction rational(double a, double b);
  /// h(x) = exp(-beta (sqrt(x) - c))
  static DampingFunction root_exponential(double beta, double c);
  static DampingFunction constant(double value);
  static DampingFunction custom(std::function<double(double)> h, std::function<double(double)> dh,
                                std::string label);

  double operator()(double x) const;
  double derivative(double x) const;
  const std::string &label() const noexcept { return label_; }

  /// Closed-form sup_{x>=0} x|h(x)| and sup x^2|h'(x)| when known.
  std::optional<double> known_sup_xh() const;
  std::optional<double> known_sup_x2dh() const;

private:
  enum class Kind { Rational, RootExponential, Constant, Custom };
  DampingFunction(Kind k, double p0, double p1, std::string label);

  Kind kind_;
  double p0_ = 0.0, p1_ = 0.0;
  std::function<double(double)> h_, dh_;
  std::string label_;
};

/// Fourth-order central difference with a relative step; used to supply and
/// validate derivatives of user damping functions.
double central_derivative(const std::function<double(double)> &f, double x);

/// Separable strain measure S(G) = scale * h(I1) * GᵀG - shift * δ.
class StrainMeasure
{
public:
  StrainMeasure(DampingFunction h, double scale, double shift, std::optional<double> s_inf,
                std::optional<double> s_prime_inf);

  /// Declared bounds follow from |GᵀG| <= I1 and the split of S'(G) into the
  /// h' term (norm 2|h'||G||GᵀG|) and the h term (norm sqrt(6)|h||G|).
  static StrainMeasure damped(DampingFunction h, double scale = 1.0);

  Mat2 evaluate(const Mat2 &g) const;
  /// Directional derivative S'(G):H.
  Mat2 derivative(const Mat2 &g, const Mat2 &h) const;
  /// Order-4 tensor with component (i,j,k,l) = d S(G)_kl / d G_ij.
  Tensor jacobian(const Mat2 &g) const;

  Tensor evaluate(const Tensor &g) const { return to_tensor(evaluate(to_mat2(g))); }
  Tensor derivative(const Tensor &g, const Tensor &h) const
  {
    return to_tensor(derivative(to_mat2(g), to_mat2(h)));
  }

  const DampingFunction &damping() const noexcept { return h_; }
  double scale() const noexcept { return scale_; }
  double shift() const noexcept { return shift_; }
  std::optional<double> s_inf() const noexcept { return s_inf_; }
  std::optional<double> s_prime_inf() const noexcept { return s_prime_inf_; }
  bool h2_satisfied() const noexcept { return s_inf_.has_value() && s_prime_inf_.has_value(); }

private:
  DampingFunction h_;
  double scale_;
  double shift_;
  std::optional<double> s_inf_;
  std::optional<double> s_prime_inf_;
};

/// Non-separable law tau = int F(s, G(s)) ds with |F(s,G)| <= m1(s) and
/// |G||d_G F(s,G)| <= m2(s).
class AgeDependentLaw
{
public:
  using Fn = std::function<Mat2(double, const Mat2 &)>;
  using DerivFn = std::function<Mat2(double, const Mat2 &, const Mat2 &)>;
  using Bound = std::function<double(double)>;

  AgeDependentLaw(Fn f, DerivFn df, Bound m1, Bound m2);
  static AgeDependentLaw from_separable(const MemoryKernel &m, const StrainMeasure &s);

  Mat2 evaluate(double s, const Mat2 &g) const { return f_(s, g); }
  Mat2 derivative(double s, const Mat2 &g, const Mat2 &h) const { return df_(s, g, h); }
  double m1(double s) const { return m1_(s); }
  double m2(double s) const { return m2_(s); }

private:
  Fn f_;
  DerivFn df_;
  Bound m1_, m2_;
};

struct ModelParameters
{
  double relaxation_time = 1.0;
  double polymer_viscosity = 1.0;
  std::optional<double> alpha;  // PSM
  double beta = 1.0;            // Wagner
  int doi_edwards_modes = 31;
  std::string damping;             // kbkz-custom h(x)
  std::string damping_derivative;  // optional h'(x)
  std::vector<double> mode_weights;
  std::vector<double> mode_times;
};

struct ConstitutiveModel
{
  std::string name;
  MemoryKernel kernel;
  StrainMeasure measure;
};

/// Names: oldroyd-b, psm-raw, psm-normalized, wagner-raw, wagner-normalized,
/// kbkz-custom, doi-edwards. The strain measure carries the modulus
/// polymer_viscosity / relaxation_time.
ConstitutiveModel model_catalog(std::string_view name, const ModelParameters &params = {});
std::vector<std::string> catalog_names();

struct H1Report
{
  bool positive = false;
  bool decreasing = false;
  bool unit_mass = false;
  double mass_error = 0.0;
  bool pass = false;
};

/// Log-spaced ages on [1e-6, 50 * max relaxation time].
std::vector<double> h1_sample_ages(const MemoryKernel &kernel, std::size_t count = 200);
H1Report verify_h1(const MemoryKernel &kernel, std::span<const double> ages, double tol = 1e-12);

struct SupEstimate
{
  double value = 0.0;
  double argmax = 0.0;
  bool bounded = false;
};

/// Supremum of f over [xmin, xmax] on a log grid refined by golden-section
/// search. A maximum sitting at xmax that still grows over the last decade is
/// reported as unbounded.
SupEstimate log_grid_sup(const std::function<double(double)> &f, double xmin = 1e-8,
                         double xmax = 1e8, std::size_t points = 4000);

struct H2Report
{
  double s_sup_est = 0.0;         // sampled sup |S(G)|
  double gs_prime_sup_est = 0.0;  // sampled sup |G||S'(G)|
  SupEstimate xh;                 // sup x|h(x)|
  SupEstimate x2dh;               // sup x^2|h'(x)|
  std::optional<double> s_inf;
  std::optional<double> s_prime_inf;
  bool pass = false;
};

/// Empirical certification of the boundedness assumption. Samples random G
/// with I1 log-uniform in [2, 1e8]; half the samples have det G = 1.
H2Report verify_h2(const StrainMeasure &measure, std::size_t budget = 20000,
                   std::uint64_t seed = 12345, double tol = 1e-9);

}  // namespace memflow
