// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "memflow/age_grid.hpp"
#include "memflow/config.hpp"
#include "memflow/constitutive.hpp"
#include "memflow/deformation.hpp"
#include "memflow/diagnostics.hpp"
#include "memflow/flow.hpp"
#include "memflow/spectral.hpp"

namespace memflow
{

enum ExitCode : int
{
  kExitOk = 0,
  kExitFailure = 1,
  kExitBlowup = 2,
  kExitViolation = 3,
};

struct RunOutcome
{
  int exit_code = kExitOk;
  std::string message;
  std::vector<DiagnosticsRecord> records;
  std::vector<std::string> warnings;
};

/// Coupled time loop. Each base step of length dt: assemble tau from the
/// history, advance u with tau frozen in two half-steps (CFL-limited
/// substeps), advance and age-shift the history with the velocities at
/// t, t + dt/2 and t + dt, then monitor.
class Simulation
{
public:
  explicit Simulation(SimulationConfig cfg, const std::optional<std::filesystem::path> &checkpoint = std::nullopt);
  Simulation(const Simulation &) = delete;
  Simulation &operator=(const Simulation &) = delete;

  /// One base step; returns its diagnostics record.
  const DiagnosticsRecord &step();
  /// Steps until t reaches T. Writes CSV rows to `csv` when given, and files
  /// under output_dir when write_files is set. Never throws on numerical
  /// blow-up; the outcome carries the exit code instead.
  RunOutcome run(std::ostream *csv = nullptr);

  void write_checkpoint(const std::filesystem::path &dir) const;

  const SimulationConfig &config() const noexcept { return cfg_; }
  const Spectral &spectral() const noexcept { return *sp_; }
  const AgeGrid &ages() const noexcept { return ages_; }
  const ConstitutiveModel &model() const noexcept { return model_; }
  const FlowState &flow() const noexcept { return state_; }
  const DeformationHistory &history() const noexcept { return *history_; }
  const TensorField2 &stress() const noexcept { return tau_; }
  const MonitorSettings &monitor_settings() const { return monitor_->settings(); }
  std::uint64_t step_index() const noexcept { return step_; }
  double time() const noexcept { return static_cast<double>(step_) * cfg_.dt; }
  const std::vector<DiagnosticsRecord> &records() const noexcept { return records_; }
  const std::vector<std::string> &warnings() const noexcept { return warnings_; }

  bool has_oracle() const noexcept { return oracle_.has_value(); }
  const OracleState &oracle() const { return oracle_.value(); }
  /// ‖tau - tau_oracle‖_{L²} / ‖tau_oracle‖_{L²}.
  double oracle_gap() const;

private:
  void restore(const std::filesystem::path &dir);
  void write_snapshot(const std::filesystem::path &dir) const;

  SimulationConfig cfg_;
  std::unique_ptr<Spectral> sp_;
  ConstitutiveModel model_;
  AgeGrid ages_;
  std::unique_ptr<FlowStepper> stepper_;
  std::unique_ptr<Monitor> monitor_;
  FlowState state_;
  Kinematics kin_;
  std::unique_ptr<DeformationHistory> history_;
  TensorField2 tau_;
  std::optional<OracleState> oracle_;
  std::uint64_t step_ = 0;
  std::vector<DiagnosticsRecord> records_;
  std::vector<std::string> warnings_;
};

/// Rows the run loop logs: every log_every steps, the initial and the final step.
bool logged_step(const SimulationConfig &cfg, std::uint64_t step);

}  // namespace memflow
