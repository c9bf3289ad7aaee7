// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/stress.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "memflow/error.hpp"

namespace memflow
{

namespace
{

constexpr std::size_t kChunk = 256;

void check_shapes(const DeformationHistory &h, const AgeGrid &ages)
{
  if (h.size() != ages.size())
    throw Error(ErrorCode::InvalidArgument, "history has " + std::to_string(h.size()) + " slices, age grid has " +
                                                std::to_string(ages.size()) + " nodes");
}

Mat2 at(const TensorField2 &g, std::size_t p) { return {g.c[0][p], g.c[1][p], g.c[2][p], g.c[3][p]}; }

// Accumulates weight(term) * eval(slice, point, term) over terms for every node.
template <class Eval>
TensorField2 accumulate(int n, std::size_t terms, Eval eval)
{
  TensorField2 tau(n);
  const std::size_t np = tau.c[0].size();
  const std::size_t chunks = (np + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < chunks; ++b)
  {
    const std::size_t p0 = b * kChunk;
    const std::size_t p1 = std::min(np, p0 + kChunk);
    std::array<std::array<NeumaierSum, 4>, kChunk> acc{};
    for (std::size_t t = 0; t < terms; ++t)
      for (std::size_t p = p0; p < p1; ++p)
      {
        const Mat2 v = eval(t, p);
        auto &a = acc[p - p0];
        a[0].add(v.xx);
        a[1].add(v.xy);
        a[2].add(v.yx);
        a[3].add(v.yy);
      }
    for (std::size_t p = p0; p < p1; ++p)
      for (std::size_t c = 0; c < 4; ++c) tau.c[c][p] = acc[p - p0][c].value();
  }
  return tau;
}

}  // namespace

TensorField2 assemble_stress(const DeformationHistory &h, const StrainMeasure &measure, const AgeGrid &ages)
{
  check_shapes(h, ages);
  const auto runs = h.runs();
  std::vector<double> mass(runs.size());
  std::vector<const TensorField2 *> slice(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r)
  {
    NeumaierSum w;
    for (std::size_t j = runs[r].begin; j < runs[r].end; ++j) w.add(ages.node_mass[j]);
    mass[r] = w.value();
    slice[r] = &h.slice(runs[r].begin);
  }
  return accumulate(h.n(), runs.size(),
                    [&](std::size_t r, std::size_t p) { return mass[r] * measure.evaluate(at(*slice[r], p)); });
}

TensorField2 assemble_stress(const DeformationHistory &h, const AgeDependentLaw &law, const AgeGrid &ages)
{
  check_shapes(h, ages);
  return accumulate(h.n(), h.size(), [&](std::size_t j, std::size_t p) {
    return ages.weights[j] * law.evaluate(ages.nodes[j], at(h.slice(j), p));
  });
}

double y_integrand_now(const DeformationHistory &h, const Spectral &sp, const AgeGrid &ages, double q, double r,
                       double mu)
{
  check_shapes(h, ages);
  if (!(q >= 1.0) || !std::isfinite(q) || !(r >= 1.0) || !std::isfinite(r))
    throw Error(ErrorCode::InvalidArgument, "y integrand needs finite exponents q, r >= 1");
  const double floor = std::sqrt(2.0 * std::min(mu, 1.0)) / 2.0;
  const auto runs = h.runs();
  std::vector<double> value(runs.size(), 0.0);
  std::size_t bad = std::numeric_limits<std::size_t>::max();
  const std::size_t nm = sp.grid().modes();
  const std::size_t np = sp.grid().points();
  const double area = 4.0 * M_PI * M_PI / static_cast<double>(np);

#pragma omp parallel
  {
    std::array<ComplexBuffer, 4> ghat;
    std::array<RealBuffer, 8> dg;
    ComplexBuffer tmp, scratch;
    bool ready = false;
#pragma omp for schedule(dynamic, 1) reduction(min : bad)
    for (std::size_t k = 0; k < runs.size(); ++k)
    {
      const TensorField2 &g = h.slice(runs[k].begin);
      for (std::size_t p = 0; p < np; ++p)
        if (!(at(g, p).frob() >= floor))
        {
          bad = std::min(bad, runs[k].begin);
          break;
        }
      if (h.handle(runs[k].begin) == h.identity()) continue;
      if (!ready)
      {
        for (auto &b : ghat) b.resize(nm);
        for (auto &b : dg) b.resize(np);
        tmp.resize(nm);
        scratch.resize(nm);
        ready = true;
      }
      for (int c = 0; c < 4; ++c) sp.forward(g.c[c].data(), ghat[c].data());
      for (int d = 0; d < 2; ++d)
      {
        const auto &kd = sp.ik(d + 1);
        for (int c = 0; c < 4; ++c)
        {
          for (std::size_t p = 0; p < nm; ++p)
            tmp[p] = Complex(-kd[p] * ghat[c][p].imag(), kd[p] * ghat[c][p].real());
          sp.inverse(tmp.data(), dg[4 * d + c].data(), scratch.data());
        }
      }
      double acc = 0.0;
      for (std::size_t p = 0; p < np; ++p)
      {
        double d2 = 0.0;
        for (int c = 0; c < 8; ++c) d2 += dg[c][p] * dg[c][p];
        acc += std::pow(std::sqrt(d2) / at(g, p).frob(), q);
      }
      value[k] = std::pow(area * acc, r / q);
    }
  }
  if (bad != std::numeric_limits<std::size_t>::max())
    throw Error(ErrorCode::DegenerateDeformation,
                "deformation norm below sqrt(2 min(mu,1))/2 in slice " + std::to_string(bad));

  NeumaierSum total;
  for (std::size_t k = 0; k < runs.size(); ++k)
  {
    if (value[k] == 0.0) continue;
    NeumaierSum w;
    for (std::size_t j = runs[k].begin; j < runs[k].end; ++j) w.add(ages.node_mass[j]);
    total.add(w.value() * value[k]);
  }
  return total.value();
}

double stress_gradient_norm(const TensorField2 &tau, const Spectral &sp, double q)
{
  return lq_norm(sp.gradient(tau), q);
}

}  // namespace memflow
