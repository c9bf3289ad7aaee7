// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "memflow/error.hpp"

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace memflow
{

namespace
{

constexpr std::array<char, 8> kMagic = {'M', 'E', 'M', 'F', 'L', 'W', '0', '1'};
constexpr std::uint64_t kHeaderBytes = 8 + 4 * 4;

void put_u32(std::ostream &os, std::uint32_t v) { os.write(reinterpret_cast<const char *>(&v), 4); }

std::uint32_t get_u32(std::istream &is, std::uint64_t offset)
{
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char *>(&v), 4)) throw SnapshotError(offset, "unexpected end of file in header");
  return v;
}

}  // namespace

std::uint64_t fnv1a(const void *data, std::size_t bytes)
{
  const auto *p = static_cast<const unsigned char *>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < bytes; ++i)
  {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

void write_block(std::ostream &os, const FieldBlock &b)
{
  const std::uint64_t expect =
      static_cast<std::uint64_t>(b.n) * b.n * b.components * (b.slices == 0 ? 1u : b.slices);
  if (b.payload.size() != expect) throw SnapshotError(0, "payload size does not match the header");
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kSnapshotVersion);
  put_u32(os, b.n);
  put_u32(os, b.components);
  put_u32(os, b.slices);
  const std::size_t bytes = b.payload.size() * sizeof(double);
  os.write(reinterpret_cast<const char *>(b.payload.data()), static_cast<std::streamsize>(bytes));
  const std::uint64_t sum = fnv1a(b.payload.data(), bytes);
  os.write(reinterpret_cast<const char *>(&sum), 8);
  if (!os) throw SnapshotError(0, "write failed");
}

FieldBlock read_block(std::istream &is)
{
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size())) throw SnapshotError(0, "unexpected end of file in magic");
  if (magic != kMagic) throw SnapshotError(0, "bad magic");
  const std::uint32_t version = get_u32(is, 8);
  if (version != kSnapshotVersion) throw SnapshotError(8, "unsupported version " + std::to_string(version));
  FieldBlock b;
  b.n = get_u32(is, 12);
  b.components = get_u32(is, 16);
  b.slices = get_u32(is, 20);
  if (b.n < 1 || b.n > (1u << 16) || b.components < 1 || b.components > 64)
    throw SnapshotError(12, "implausible header sizes");
  const std::uint64_t count =
      static_cast<std::uint64_t>(b.n) * b.n * b.components * (b.slices == 0 ? 1u : b.slices);
  b.payload.resize(count);
  const std::uint64_t bytes = count * sizeof(double);
  is.read(reinterpret_cast<char *>(b.payload.data()), static_cast<std::streamsize>(bytes));
  const auto got = static_cast<std::uint64_t>(is.gcount());
  if (got != bytes) throw SnapshotError(kHeaderBytes + got, "size mismatch: payload truncated");
  std::uint64_t sum = 0;
  is.read(reinterpret_cast<char *>(&sum), 8);
  if (static_cast<std::uint64_t>(is.gcount()) != 8)
    throw SnapshotError(kHeaderBytes + bytes + static_cast<std::uint64_t>(is.gcount()),
                        "size mismatch: checksum truncated");
  if (sum != fnv1a(b.payload.data(), bytes)) throw SnapshotError(kHeaderBytes + bytes, "checksum mismatch");
  if (is.peek() != std::char_traits<char>::eof())
    throw SnapshotError(kHeaderBytes + bytes + 8, "size mismatch: trailing bytes");
  return b;
}

void write_block(const std::filesystem::path &path, const FieldBlock &b)
{
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw SnapshotError(0, "cannot open " + tmp.string() + " for writing");
    write_block(os, b);
  }
  std::filesystem::rename(tmp, path);
}

FieldBlock read_block(const std::filesystem::path &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError(0, "cannot open " + path.string());
  return read_block(is);
}

template <std::size_t C>
FieldBlock to_block(const FieldN<C> &f)
{
  FieldBlock b;
  b.n = static_cast<std::uint32_t>(f.n());
  b.components = C;
  const std::size_t np = f.c[0].size();
  b.payload.resize(C * np);
  for (std::size_t c = 0; c < C; ++c) std::memcpy(b.payload.data() + c * np, f.c[c].data(), np * sizeof(double));
  return b;
}

template <std::size_t C>
FieldN<C> from_block(const FieldBlock &b)
{
  if (b.components != C || b.slices != 0)
    throw SnapshotError(16, "expected " + std::to_string(C) + " components and no slices");
  FieldN<C> f(static_cast<int>(b.n));
  const std::size_t np = f.c[0].size();
  for (std::size_t c = 0; c < C; ++c) std::memcpy(f.c[c].data(), b.payload.data() + c * np, np * sizeof(double));
  return f;
}

template FieldBlock to_block<2>(const FieldN<2> &);
template FieldBlock to_block<4>(const FieldN<4> &);
template FieldN<2> from_block<2>(const FieldBlock &);
template FieldN<4> from_block<4>(const FieldBlock &);

FieldBlock history_block(const DeformationHistory &h, const std::vector<std::size_t> &slices)
{
  FieldBlock b;
  b.n = static_cast<std::uint32_t>(h.n());
  b.components = 4;
  b.slices = static_cast<std::uint32_t>(slices.size());
  const std::size_t np = static_cast<std::size_t>(h.n()) * h.n();
  b.payload.resize(slices.size() * 4 * np);
  double *dst = b.payload.data();
  for (std::size_t j : slices)
  {
    const TensorField2 &g = h.slice(j);
    for (std::size_t c = 0; c < 4; ++c, dst += np) std::memcpy(dst, g.c[c].data(), np * sizeof(double));
  }
  return b;
}

FieldBlock history_block(const DeformationHistory &h)
{
  std::vector<std::size_t> all(h.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  return history_block(h, all);
}

std::vector<TensorField2> history_fields(const FieldBlock &b)
{
  if (b.components != 4 || b.slices == 0) throw SnapshotError(16, "expected a 4-component history block");
  const std::size_t np = static_cast<std::size_t>(b.n) * b.n;
  std::vector<TensorField2> out;
  out.reserve(b.slices);
  const double *src = b.payload.data();
  for (std::uint32_t j = 0; j < b.slices; ++j)
  {
    TensorField2 g(static_cast<int>(b.n));
    for (std::size_t c = 0; c < 4; ++c, src += np) std::memcpy(g.c[c].data(), src, np * sizeof(double));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace memflow
