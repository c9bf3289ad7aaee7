// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memflow/age_grid.hpp"
#include "memflow/constitutive.hpp"

namespace memflow
{

struct SimulationConfig
{
  // [grid]
  int n = 0;
  // [time]
  double dt = 0.0;  // base step, equal to the age step
  double t_final = 0.0;
  int substeps = 1;  // minimum flow substeps per base step
  double cfl_safety = 0.5;
  // [fluid]
  double eta = 0.0;
  // [model]
  std::string model;
  ModelParameters params;
  // [memory]
  double eps_tail = 1e-6;
  std::size_t memory_cap = kDefaultMaxAgeNodes;
  // [analysis]
  double q = 8.0;
  double r = 4.0;
  double mu = 1.0;
  double det_tol = 1e-2;
  int log_every = 1;
  bool fatal_on_violation = false;
  bool oracle = false;
  // [initial]
  enum class Velocity { TaylorGreen, Random, Snapshot, Zero };
  Velocity velocity = Velocity::TaylorGreen;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  int band = 4;
  std::string velocity_file;
  enum class History { Identity, Sine, Snapshot };
  History history = History::Identity;
  double history_amplitude = 0.5;
  std::string history_file;
  // [output]
  std::string output_dir = "memflow-out";
  int snapshot_every = 0;
  int checkpoint_every = 0;
  std::vector<std::size_t> snapshot_slices;
  bool write_files = true;

  std::uint64_t total_steps() const;
};

/// Parses an INI file with sections [grid] [time] [fluid] [model] [memory]
/// [analysis] [initial] [output]. Unknown sections or keys are rejected.
/// Required: grid.N, time.dt, time.T, fluid.eta, model.name.
SimulationConfig parse_config(const std::filesystem::path &path);
SimulationConfig parse_config_string(const std::string &text);

/// Checks every invariant and that the age grid fits the memory cap; throws
/// ConfigError naming the key, or HistoryTooLong.
void validate_config(const SimulationConfig &cfg);

/// Canonical INI text that parses back to the same configuration.
std::string to_ini(const SimulationConfig &cfg);

}  // namespace memflow
