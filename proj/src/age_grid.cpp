// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/age_grid.hpp"

#include <cmath>
#include <limits>

#include "memflow/error.hpp"

namespace memflow
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(double dt, double eps_tail)
{
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "age step must be positive");
  if (!(eps_tail > 0.0) || !(eps_tail < 1.0))
    throw Error(ErrorCode::InvalidArgument,
                "tail tolerance must lie in (0, 1); zero would need an infinite history");
}

// Smallest n with mass(n*dt, inf) <= eps. The tail is nonincreasing in n.
std::size_t tail_steps(const MemoryKernel &kernel, double dt, double eps_tail)
{
  auto tail = [&](std::size_t n) { return kernel.interval_mass(static_cast<double>(n) * dt, kInf); };
  if (tail(0) <= eps_tail) return 0;
  std::size_t hi = 1;
  while (!(tail(hi) <= eps_tail))
  {
    if (hi > (std::size_t{1} << 50)) throw HistoryTooLong(std::numeric_limits<std::size_t>::max(), 0);
    hi *= 2;
  }
  std::size_t lo = hi / 2;  // tail(lo) > eps (or lo == 0)
  while (hi - lo > 1)
  {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (tail(mid) <= eps_tail) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

std::size_t required_age_nodes(const MemoryKernel &kernel, double dt, double eps_tail)
{
  validate(dt, eps_tail);
  return tail_steps(kernel, dt, eps_tail) + 1;
}

AgeGrid build_age_grid(const MemoryKernel &kernel, double dt, double eps_tail, std::size_t max_nodes)
{
  validate(dt, eps_tail);
  const std::size_t steps = std::max<std::size_t>(tail_steps(kernel, dt, eps_tail), 1);
  const std::size_t ns = steps + 1;
  if (ns > max_nodes) throw HistoryTooLong(ns, max_nodes);

  AgeGrid g;
  g.ds = dt;
  g.s_max = static_cast<double>(steps) * dt;
  g.nodes.resize(ns);
  g.weights.resize(ns);
  g.node_mass.resize(ns);
  g.lumped = kernel.singular();
  g.tail_error = kernel.interval_mass(g.s_max, kInf);

  for (std::size_t j = 0; j < ns; ++j)
  {
    g.nodes[j] = static_cast<double>(j) * dt;
    g.weights[j] = (j == 0 || j + 1 == ns) ? 0.5 * dt : dt;
  }

  if (g.lumped)
  {
    for (std::size_t j = 0; j < ns; ++j)
    {
      const double a = j == 0 ? 0.0 : g.nodes[j] - 0.5 * dt;
      const double b = j + 1 == ns ? g.s_max : g.nodes[j] + 0.5 * dt;
      g.node_mass[j] = kernel.interval_mass(a, b);
    }
    g.quad_tol = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(ns);
  }
  else
  {
    for (std::size_t j = 0; j < ns; ++j) g.node_mass[j] = g.weights[j] * kernel.density(g.nodes[j]);
    // Per exponential mode the trapezoid excess is bounded by ds^2/12 (m'(S_max) - m'(0)).
    const double slope_span = std::fabs(kernel.density_derivative(0.0) - kernel.density_derivative(g.s_max));
    g.quad_tol = dt * dt / 12.0 * slope_span +
                 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(ns);
  }
  return g;
}

double quadrate(const AgeGrid &grid, std::span<const double> samples)
{
  if (samples.size() != grid.size())
    throw Error(ErrorCode::InvalidArgument, "quadrature sample count does not match the age grid");
  NeumaierSum acc;
  for (std::size_t j = 0; j < samples.size(); ++j) acc.add(grid.node_mass[j] * samples[j]);
  return acc.value();
}

Mat2 quadrate(const AgeGrid &grid, std::span<const Mat2> samples)
{
  if (samples.size() != grid.size())
    throw Error(ErrorCode::InvalidArgument, "quadrature sample count does not match the age grid");
  NeumaierSum xx, xy, yx, yy;
  for (std::size_t j = 0; j < samples.size(); ++j)
  {
    const double w = grid.node_mass[j];
    xx.add(w * samples[j].xx);
    xy.add(w * samples[j].xy);
    yx.add(w * samples[j].yx);
    yy.add(w * samples[j].yy);
  }
  return {xx.value(), xy.value(), yx.value(), yy.value()};
}

}  // namespace memflow
