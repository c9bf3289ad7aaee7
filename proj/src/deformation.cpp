// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "memflow/error.hpp"

namespace memflow
{

namespace
{

bool is_uniform(const ScalarField &f)
{
  const double v0 = f[0];
  for (double v : f.values())
    if (v != v0) return false;
  return true;
}

bool is_zero(const ScalarField &f)
{
  for (double v : f.values())
    if (v != 0.0) return false;
  return true;
}

bool uniform_slice(const TensorField2 &g)
{
  for (const auto &c : g.c)
    if (!is_uniform(c)) return false;
  return true;
}

Mat2 at(const TensorField2 &g, std::size_t p) { return {g.c[0][p], g.c[1][p], g.c[2][p], g.c[3][p]}; }

void put(TensorField2 &g, std::size_t p, const Mat2 &m)
{
  g.c[0][p] = m.xx;
  g.c[1][p] = m.xy;
  g.c[2][p] = m.yx;
  g.c[3][p] = m.yy;
}

bool all_finite(const TensorField2 &g)
{
  for (const auto &c : g.c)
    for (double v : c.values())
      if (!std::isfinite(v)) return false;
  return true;
}

// Scratch space for advancing one slice; one instance per thread.
struct Workspace
{
  std::array<ComplexBuffer, 4> ghat, k, stage, acc;
  std::array<RealBuffer, 8> dg;
  std::array<RealBuffer, 4> r, gstar;
  ComplexBuffer tmp, scratch;

  explicit Workspace(const TorusGrid &grid)
  {
    for (auto &b : ghat) b.resize(grid.modes());
    for (auto &b : k) b.resize(grid.modes());
    for (auto &b : stage) b.resize(grid.modes());
    for (auto &b : acc) b.resize(grid.modes());
    for (auto &b : dg) b.resize(grid.points());
    for (auto &b : r) b.resize(grid.points());
    for (auto &b : gstar) b.resize(grid.points());
    tmp.resize(grid.modes());
    scratch.resize(grid.modes());
  }
};

// out = mask * FFT(-u·∇G + G·L), G given both physically and spectrally.
void transport_rhs(const Spectral &sp, const std::array<const double *, 4> &g,
                   const std::array<ComplexBuffer, 4> &ghat, const Kinematics &kin,
                   std::array<ComplexBuffer, 4> &out, Workspace &w)
{
  const std::size_t nm = sp.grid().modes();
  const std::size_t np = sp.grid().points();
  for (int d = 0; d < 2; ++d)
  {
    const auto &kd = sp.ik(d + 1);
    for (int c = 0; c < 4; ++c)
    {
      const Complex *src = ghat[c].data();
      for (std::size_t p = 0; p < nm; ++p) w.tmp[p] = Complex(-kd[p] * src[p].imag(), kd[p] * src[p].real());
      sp.inverse(w.tmp.data(), w.dg[4 * d + c].data(), w.scratch.data());
    }
  }
  const double *u1 = kin.u.c[0].data();
  const double *u2 = kin.u.c[1].data();
  const double *l11 = kin.grad_u.c[0].data();
  const double *l12 = kin.grad_u.c[1].data();
  const double *l21 = kin.grad_u.c[2].data();
  const double *l22 = kin.grad_u.c[3].data();
  for (std::size_t p = 0; p < np; ++p)
  {
    const double g11 = g[0][p], g12 = g[1][p], g21 = g[2][p], g22 = g[3][p];
    for (int c = 0; c < 4; ++c) w.r[c][p] = -(u1[p] * w.dg[c][p] + u2[p] * w.dg[4 + c][p]);
    w.r[0][p] += g11 * l11[p] + g12 * l21[p];
    w.r[1][p] += g11 * l12[p] + g12 * l22[p];
    w.r[2][p] += g21 * l11[p] + g22 * l21[p];
    w.r[3][p] += g21 * l12[p] + g22 * l22[p];
  }
  const auto &mask = sp.dealias_mask();
  for (int c = 0; c < 4; ++c)
  {
    sp.forward(w.r[c].data(), out[c].data());
    for (std::size_t p = 0; p < nm; ++p) out[c][p] *= mask[p];
  }
}

TensorField2 advance_spectral(const Spectral &sp, const TensorField2 &g, const Kinematics &from,
                              const Kinematics &mid, const Kinematics &to, double dt, Workspace &w)
{
  const std::size_t nm = sp.grid().modes();
  auto phys = [&w](int c) { return w.gstar[c].data(); };
  for (int c = 0; c < 4; ++c) sp.forward(g.c[c].data(), w.ghat[c].data());

  // Classical RK4 with stage velocities at t, t + dt/2, t + dt/2, t + dt.
  auto set_stage = [&](double a) {
    for (int c = 0; c < 4; ++c)
    {
      for (std::size_t p = 0; p < nm; ++p) w.stage[c][p] = w.ghat[c][p] + a * w.k[c][p];
      std::copy(w.stage[c].begin(), w.stage[c].end(), w.tmp.begin());
      sp.inverse(w.tmp.data(), phys(c), w.scratch.data());
    }
  };
  auto accumulate = [&](double weight) {
    for (int c = 0; c < 4; ++c)
      for (std::size_t p = 0; p < nm; ++p) w.acc[c][p] += weight * w.k[c][p];
  };

  transport_rhs(sp, {g.c[0].data(), g.c[1].data(), g.c[2].data(), g.c[3].data()}, w.ghat, from, w.k, w);
  for (int c = 0; c < 4; ++c) std::copy(w.k[c].begin(), w.k[c].end(), w.acc[c].begin());
  set_stage(0.5 * dt);
  transport_rhs(sp, {phys(0), phys(1), phys(2), phys(3)}, w.stage, mid, w.k, w);
  accumulate(2.0);
  set_stage(0.5 * dt);
  transport_rhs(sp, {phys(0), phys(1), phys(2), phys(3)}, w.stage, mid, w.k, w);
  accumulate(2.0);
  set_stage(dt);
  transport_rhs(sp, {phys(0), phys(1), phys(2), phys(3)}, w.stage, to, w.k, w);
  accumulate(1.0);

  TensorField2 out(sp.n());
  for (int c = 0; c < 4; ++c)
  {
    for (std::size_t p = 0; p < nm; ++p) w.tmp[p] = w.ghat[c][p] + (dt / 6.0) * w.acc[c][p];
    sp.inverse(w.tmp.data(), out.c[c].data(), w.scratch.data());
  }
  return out;
}

// Classical RK4 for dG/dt = G L with spatially uniform L.
Mat2 rk4_uniform(const Mat2 &g, const Mat2 &l0, const Mat2 &lm, const Mat2 &l1, double dt)
{
  const Mat2 k1 = g * l0;
  const Mat2 k2 = (g + (0.5 * dt) * k1) * lm;
  const Mat2 k3 = (g + (0.5 * dt) * k2) * lm;
  const Mat2 k4 = (g + dt * k3) * l1;
  return g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Kinematics make_kinematics(const Spectral &sp, const VectorField &u)
{
  Kinematics k;
  k.u = u;
  k.grad_u = sp.gradient(u);
  k.homogeneous = is_zero(u.c[0]) && is_zero(u.c[1]) && uniform_slice(k.grad_u);
  if (k.homogeneous) k.uniform_grad = at(k.grad_u, 0);
  return k;
}

Kinematics homogeneous_kinematics(int n, const Mat2 &grad_u)
{
  Kinematics k;
  k.u = VectorField(n);
  k.grad_u = TensorField2(n);
  for (std::size_t p = 0; p < k.grad_u.c[0].size(); ++p) put(k.grad_u, p, grad_u);
  k.homogeneous = true;
  k.uniform_grad = grad_u;
  return k;
}

// ---------------------------------------------------------------------------

DeformationHistory::DeformationHistory(int n, std::size_t slices)
  : n_(n), identity_(std::make_shared<const TensorField2>(identity_tensor_field(n))), slices_(slices, identity_)
{
  if (slices == 0) throw Error(ErrorCode::InvalidArgument, "history needs at least one slice");
}

void DeformationHistory::set_slice(std::size_t j, TensorField2 g)
{
  if (g.n() != n_) throw Error(ErrorCode::InvalidArgument, "slice grid size mismatch");
  slices_.at(j) = std::make_shared<const TensorField2>(std::move(g));
}

void DeformationHistory::set_handle(std::size_t j, Slice s)
{
  if (!s || s->n() != n_) throw Error(ErrorCode::InvalidArgument, "slice grid size mismatch");
  slices_.at(j) = std::move(s);
}

std::vector<DeformationHistory::Run> DeformationHistory::runs() const
{
  std::vector<Run> out;
  std::size_t b = 0;
  for (std::size_t j = 1; j <= slices_.size(); ++j)
    if (j == slices_.size() || slices_[j] != slices_[b])
    {
      out.push_back({b, j});
      b = j;
    }
  return out;
}

void DeformationHistory::deduplicate()
{
  auto same = [](const TensorField2 &a, const TensorField2 &b) {
    for (std::size_t c = 0; c < 4; ++c)
      if (std::memcmp(a.c[c].data(), b.c[c].data(), a.c[c].size() * sizeof(double)) != 0) return false;
    return true;
  };
  for (std::size_t j = 0; j < slices_.size(); ++j)
  {
    if (slices_[j] != identity_ && same(*slices_[j], *identity_)) slices_[j] = identity_;
    if (j > 0 && slices_[j] != slices_[j - 1] && same(*slices_[j], *slices_[j - 1])) slices_[j] = slices_[j - 1];
  }
}

DeformationHistory init_history(const HistoryInit &spec, const AgeGrid &ages, int n, bool *slice0_replaced)
{
  DeformationHistory h(n, ages.size());
  if (slice0_replaced != nullptr) *slice0_replaced = false;
  if (spec.kind == HistoryInit::Kind::Identity) return h;

  if (!(spec.mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "determinant threshold mu must be positive");
  if (spec.fields.size() != ages.size())
    throw Error(ErrorCode::InvalidArgument, "explicit history has " + std::to_string(spec.fields.size()) +
                                                " slices, age grid has " + std::to_string(ages.size()));
  for (std::size_t j = 0; j < spec.fields.size(); ++j)
  {
    const TensorField2 &g = spec.fields[j];
    if (g.n() != n) throw Error(ErrorCode::InvalidArgument, "explicit history slice has the wrong grid size");
    for (std::size_t p = 0; p < g.c[0].size(); ++p)
    {
      const double d = at(g, p).det();
      if (!(d >= spec.mu) || !(d > 0.0))
        throw Error(ErrorCode::InvalidArgument, "explicit history slice " + std::to_string(j) + " has det G = " +
                                                    std::to_string(d) + " below mu = " + std::to_string(spec.mu));
    }
  }
  if (!(spec.fields[0] == *h.identity()) && slice0_replaced != nullptr) *slice0_replaced = true;
  for (std::size_t j = 1; j < spec.fields.size(); ++j) h.set_slice(j, spec.fields[j]);
  h.deduplicate();
  return h;
}

void age_shift(DeformationHistory &h)
{
  for (std::size_t j = h.size() - 1; j > 0; --j) h.set_handle(j, h.handle(j - 1));
  h.set_handle(0, h.identity());
  h.set_generation(h.generation() + 1);
}

namespace
{

template <class PointFn>
double min_over_history(const DeformationHistory &h, PointFn fn)
{
  const auto runs = h.runs();
  double m = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(dynamic, 1) reduction(min : m)
  for (std::size_t r = 0; r < runs.size(); ++r)
  {
    const TensorField2 &g = h.slice(runs[r].begin);
    for (std::size_t p = 0; p < g.c[0].size(); ++p) m = std::min(m, fn(at(g, p)));
  }
  return m;
}

}  // namespace

double min_det(const DeformationHistory &h)
{
  return min_over_history(h, [](const Mat2 &g) { return g.det(); });
}

double min_norm(const DeformationHistory &h)
{
  return min_over_history(h, [](const Mat2 &g) { return g.frob(); });
}

void stretch_advect_step(DeformationHistory &h, const Spectral &sp, const Kinematics &from,
                         const Kinematics &mid, const Kinematics &to, double dt)
{
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "deformation step needs dt > 0");
  if (from.u.n() != h.n() || mid.u.n() != h.n() || to.u.n() != h.n() || sp.n() != h.n())
    throw Error(ErrorCode::InvalidArgument, "kinematics grid does not match the history");

  const std::size_t ns = h.size();
  std::vector<DeformationHistory::Run> runs;
  for (const auto &r : h.runs())
    if (r.begin + 1 < ns) runs.push_back({r.begin, std::min(r.end, ns - 1)});

  const bool homogeneous = from.homogeneous && mid.homogeneous && to.homogeneous;
  const bool frozen =
      homogeneous && from.uniform_grad == Mat2{} && mid.uniform_grad == Mat2{} && to.uniform_grad == Mat2{};

  std::vector<DeformationHistory::Slice> advanced(runs.size());
  std::size_t bad = std::numeric_limits<std::size_t>::max();

  if (frozen)
  {
    for (std::size_t r = 0; r < runs.size(); ++r) advanced[r] = h.handle(runs[r].begin);
  }
  else
  {
#pragma omp parallel
    {
      std::unique_ptr<Workspace> w;
#pragma omp for schedule(dynamic, 1) reduction(min : bad)
      for (std::size_t r = 0; r < runs.size(); ++r)
      {
        const TensorField2 &g = h.slice(runs[r].begin);
        TensorField2 next;
        if (homogeneous)
        {
          next = TensorField2(g.n());
          if (uniform_slice(g))
          {
            const Mat2 m = rk4_uniform(at(g, 0), from.uniform_grad, mid.uniform_grad, to.uniform_grad, dt);
            for (std::size_t p = 0; p < g.c[0].size(); ++p) put(next, p, m);
          }
          else
          {
            for (std::size_t p = 0; p < g.c[0].size(); ++p)
              put(next, p, rk4_uniform(at(g, p), from.uniform_grad, mid.uniform_grad, to.uniform_grad, dt));
          }
        }
        else
        {
          if (!w) w = std::make_unique<Workspace>(sp.grid());
          next = advance_spectral(sp, g, from, mid, to, dt, *w);
        }
        if (!all_finite(next)) bad = std::min(bad, runs[r].begin);
        advanced[r] = std::make_shared<const TensorField2>(std::move(next));
      }
    }
  }
  if (bad != std::numeric_limits<std::size_t>::max())
    throw NumericalBlowup(h.generation(), bad, "non-finite deformation");

  std::vector<DeformationHistory::Slice> next(ns);
  next[0] = h.identity();
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (std::size_t j = runs[r].begin; j < runs[r].end; ++j) next[j + 1] = advanced[r];
  for (std::size_t j = 0; j < ns; ++j) h.set_handle(j, std::move(next[j]));
  h.set_generation(h.generation() + 1);
}

}  // namespace memflow
