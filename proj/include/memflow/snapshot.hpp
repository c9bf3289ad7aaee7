// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "memflow/deformation.hpp"
#include "memflow/spectral.hpp"

namespace memflow
{

/// Binary field block: magic "MEMFLW01", little-endian u32 version, N,
/// component count and slice count (0 for plain fields), f64 payload in
/// row-major (slice, component, i, j) order, u64 FNV-1a of the payload bytes.
struct FieldBlock
{
  std::uint32_t n = 0;
  std::uint32_t components = 0;
  std::uint32_t slices = 0;
  std::vector<double> payload;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

std::uint64_t fnv1a(const void *data, std::size_t bytes);

void write_block(std::ostream &os, const FieldBlock &b);
FieldBlock read_block(std::istream &is);
void write_block(const std::filesystem::path &path, const FieldBlock &b);
FieldBlock read_block(const std::filesystem::path &path);

template <std::size_t C>
FieldBlock to_block(const FieldN<C> &f);
template <std::size_t C>
FieldN<C> from_block(const FieldBlock &b);

/// Every slice in order.
FieldBlock history_block(const DeformationHistory &h);
/// Only the listed slices, in the order given.
FieldBlock history_block(const DeformationHistory &h, const std::vector<std::size_t> &slices);
/// One tensor field per slice of a history block.
std::vector<TensorField2> history_fields(const FieldBlock &b);

}  // namespace memflow
