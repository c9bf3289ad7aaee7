// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "memflow/age_grid.hpp"
#include "memflow/spectral.hpp"
#include "memflow/tensor.hpp"

namespace memflow
{

/// Velocity together with its gradient L_lk = d_l u_k, both physical.
struct Kinematics
{
  VectorField u;
  TensorField2 grad_u;
  /// u vanishes identically and grad_u equals `uniform_grad` everywhere.
  bool homogeneous = false;
  Mat2 uniform_grad{};
};

Kinematics make_kinematics(const Spectral &sp, const VectorField &u);
/// u = 0 with a spatially uniform gradient; drives homogeneous deformation.
Kinematics homogeneous_kinematics(int n, const Mat2 &grad_u);

/// Age-structured deformation G(s_j, x), one tensor field per age node.
///
/// Slices are immutable shared handles. Slices with equal content may share
/// one buffer, so a history that started from the identity stores only the
/// slices that have actually been deformed differently.
class DeformationHistory
{
public:
  using Slice = std::shared_ptr<const TensorField2>;

  /// A maximal block [begin, end) of consecutive slices sharing a buffer.
  struct Run
  {
    std::size_t begin;
    std::size_t end;
  };

  DeformationHistory(int n, std::size_t slices);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return slices_.size(); }
  std::uint64_t generation() const noexcept { return generation_; }
  void set_generation(std::uint64_t g) noexcept { generation_ = g; }

  const TensorField2 &slice(std::size_t j) const { return *slices_.at(j); }
  const Slice &handle(std::size_t j) const { return slices_.at(j); }
  const Slice &identity() const noexcept { return identity_; }
  void set_slice(std::size_t j, TensorField2 g);
  void set_handle(std::size_t j, Slice s);

  std::vector<Run> runs() const;
  std::size_t unique_slices() const { return runs().size(); }

  /// Merge adjacent slices whose contents are bitwise equal.
  void deduplicate();

private:
  int n_;
  Slice identity_;
  std::vector<Slice> slices_;
  std::uint64_t generation_ = 0;
};

struct HistoryInit
{
  enum class Kind { Identity, Explicit };
  Kind kind = Kind::Identity;
  /// Per-age fields for Kind::Explicit; must match the age grid length.
  std::vector<TensorField2> fields;
  double mu = 1.0;
};

/// Identity: every slice is δ. Explicit: fields are checked for
/// det G >= mu > 0; slice 0 is then forced to δ, with `slice0_replaced`
/// reporting whether the supplied slice differed.
DeformationHistory init_history(const HistoryInit &spec, const AgeGrid &ages, int n,
                                bool *slice0_replaced = nullptr);

/// Slice j takes slice j-1, slice 0 becomes δ, the oldest slice drops off.
void age_shift(DeformationHistory &h);

/// Minimum of det G over all slices and nodes.
double min_det(const DeformationHistory &h);
/// Minimum of |G| over all slices and nodes.
double min_norm(const DeformationHistory &h);

/// One full step of length dt along the age characteristics: every slice is
/// advanced by d_t G = -u·∇G + G·∇u with the classical four-stage Runge-Kutta
/// method (stage velocities `from` at t, `mid` at t + dt/2 for the two
/// middle stages and `to` at t + dt, dealiased spectral derivatives), then
/// the history is age-shifted. Throws NumericalBlowup on non-finite values.
void stretch_advect_step(DeformationHistory &h, const Spectral &sp, const Kinematics &from,
                         const Kinematics &mid, const Kinematics &to, double dt);

}  // namespace memflow
