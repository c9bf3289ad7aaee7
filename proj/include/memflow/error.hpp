// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace memflow
{

enum class ErrorCode
{
  InvalidArgument,
  SingularOrigin,
  HistoryTooLong,
  DegenerateDeformation,
  NumericalBlowup,
  Config,
  Snapshot,
  QuadratureFailure,
  UnknownModel,
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class HistoryTooLong : public Error
{
public:
  HistoryTooLong(std::size_t required, std::size_t cap)
    : Error(ErrorCode::HistoryTooLong,
            "history too long: " + std::to_string(required) + " age nodes required, cap is " +
                std::to_string(cap)),
      required_(required)
  {
  }
  std::size_t required_nodes() const noexcept { return required_; }

private:
  std::size_t required_;
};

class NumericalBlowup : public Error
{
public:
  NumericalBlowup(std::uint64_t step, std::size_t slice, const std::string &what)
    : Error(ErrorCode::NumericalBlowup, what + " (step " + std::to_string(step) + ", slice " +
                                            std::to_string(slice) + ")"),
      step_(step), slice_(slice)
  {
  }
  std::uint64_t step() const noexcept { return step_; }
  std::size_t slice() const noexcept { return slice_; }

private:
  std::uint64_t step_;
  std::size_t slice_;
};

class ConfigError : public Error
{
public:
  ConfigError(std::string key, const std::string &what)
    : Error(ErrorCode::Config, key.empty() ? what : key + ": " + what), key_(std::move(key))
  {
  }
  const std::string &key() const noexcept { return key_; }

private:
  std::string key_;
};

class SnapshotError : public Error
{
public:
  SnapshotError(std::uint64_t offset, const std::string &what)
    : Error(ErrorCode::Snapshot, what + " at byte offset " + std::to_string(offset)),
      offset_(offset)
  {
  }
  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

}  // namespace memflow
