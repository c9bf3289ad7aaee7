// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

#include "memflow/spectral.hpp"

namespace memflow
{

struct FlowState
{
  double t = 0.0;
  VectorField u;
  std::uint64_t steps = 0;
};

/// Incompressible momentum equation d_t u + u·∇u + ∇p - eta Δu = div tau + f
/// on the torus. Time stepping is Heun's method on the Leray-projected,
/// dealiased explicit terms with the exact viscous integrating factor.
class FlowStepper
{
public:
  /// Body force f(t) sampled in physical space; used for manufactured solutions.
  using Forcing = std::function<VectorField(double)>;

  FlowStepper(const Spectral &sp, double eta);

  double eta() const noexcept { return eta_; }
  void set_forcing(Forcing f) { forcing_ = std::move(f); }

  /// One step of length dt with tau held fixed.
  void step(FlowState &s, const TensorField2 &tau, double dt) const;
  /// `substeps` equal steps covering [t, t + interval] with tau held fixed.
  void advance(FlowState &s, const TensorField2 &tau, double interval, int substeps) const;

private:
  const Spectral &sp_;
  double eta_;
  Forcing forcing_;
};

/// min(base_dt, safety * dx / max(|u|_inf, u_floor)).
double cfl_dt(const VectorField &u, const TorusGrid &grid, double safety, double base_dt, double u_floor = 1e-12);
/// Smallest substep count m >= min_substeps with interval / m <= cfl_dt.
int substeps_for(const VectorField &u, const TorusGrid &grid, double safety, double interval, int min_substeps);

/// (1/2) ‖u‖²_{L²} under the discrete norm convention.
double kinetic_energy(const VectorField &u);
/// sup_x |div u| computed spectrally.
double divergence_sup(const Spectral &sp, const VectorField &u);
/// sup_x |∇u| (pointwise Frobenius norm).
double gradient_sup(const Spectral &sp, const VectorField &u);

/// amplitude * exp(-2 eta t) (sin x1 cos x2, -cos x1 sin x2).
VectorField taylor_green(int n, double amplitude = 1.0, double eta = 0.0, double t = 0.0);
/// Divergence-free field from a random stream function on modes 1 <= |k|_inf <= band,
/// scaled so that sup |u| = amplitude.
VectorField random_band_limited(const Spectral &sp, std::uint64_t seed, int band, double amplitude = 1.0);

}  // namespace memflow
