// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "memflow/constitutive.hpp"
#include "memflow/tensor.hpp"

namespace memflow
{

inline constexpr std::size_t kDefaultMaxAgeNodes = 200000;

/// Uniform age grid s_j = j * ds on [0, S_max] with per-node kernel masses.
///
/// For regular kernels node_mass[j] = w_j m(s_j) with composite trapezoid
/// weights w_j. For kernels singular at the origin each node instead carries
/// the exact kernel mass of its cell [s_j - ds/2, s_j + ds/2] clipped to
/// [0, S_max]. tail_error is the mass beyond S_max and quad_tol bounds the
/// quadrature error on the constant integrand.
struct AgeGrid
{
  double ds = 0.0;
  double s_max = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> node_mass;
  double tail_error = 0.0;
  double quad_tol = 0.0;
  bool lumped = false;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// S_max is the smallest multiple of dt whose kernel tail mass is at most
/// eps_tail. Throws HistoryTooLong when more than max_nodes nodes are needed.
AgeGrid build_age_grid(const MemoryKernel &kernel, double dt, double eps_tail,
                       std::size_t max_nodes = kDefaultMaxAgeNodes);

/// Number of nodes build_age_grid would produce, without allocating.
std::size_t required_age_nodes(const MemoryKernel &kernel, double dt, double eps_tail);

/// Sum of node_mass[j] * f[j] with Neumaier-compensated summation.
double quadrate(const AgeGrid &grid, std::span<const double> samples);
Mat2 quadrate(const AgeGrid &grid, std::span<const Mat2> samples);

/// Compensated accumulator; result is independent of thread count as long
/// as terms arrive in a fixed order.
class NeumaierSum
{
public:
  void add(double v) noexcept
  {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace memflow
