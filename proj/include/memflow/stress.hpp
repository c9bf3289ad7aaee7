// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "memflow/age_grid.hpp"
#include "memflow/constitutive.hpp"
#include "memflow/deformation.hpp"
#include "memflow/spectral.hpp"

namespace memflow
{

/// tau(x) = sum_j node_mass[j] S(G_j(x)). Slices sharing a buffer are
/// evaluated once with their masses summed; summation order is fixed.
TensorField2 assemble_stress(const DeformationHistory &h, const StrainMeasure &measure, const AgeGrid &ages);
/// tau(x) = sum_j w_j F(s_j, G_j(x)) with trapezoid weights w_j; F carries the kernel.
TensorField2 assemble_stress(const DeformationHistory &h, const AgeDependentLaw &law, const AgeGrid &ages);

/// sum_j node_mass[j] ‖∇G_j / |G_j|‖_{L^q}^r. Throws DegenerateDeformation if
/// |G| drops below sqrt(2 min(mu, 1)) / 2 anywhere.
double y_integrand_now(const DeformationHistory &h, const Spectral &sp, const AgeGrid &ages, double q, double r,
                       double mu = 1.0);

/// Discrete L^q norm of the spectral gradient of tau.
double stress_gradient_norm(const TensorField2 &tau, const Spectral &sp, double q);

}  // namespace memflow
