// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "memflow/error.hpp"
#include "memflow/snapshot.hpp"
#include "memflow/stress.hpp"

namespace memflow
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr int kCheckpointVersion = 1;

TensorField2 sine_slice(int n, double a)
{
  const TorusGrid g(n);
  TensorField2 f(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
    {
      const double v = 1.0 + a * std::sin(g.x(i));
      f.c[0](i, j) = v;
      f.c[3](i, j) = v;
    }
  return f;
}

VectorField initial_velocity(const SimulationConfig &c, const Spectral &sp)
{
  switch (c.velocity)
  {
  case SimulationConfig::Velocity::TaylorGreen: return taylor_green(c.n, c.amplitude);
  case SimulationConfig::Velocity::Random: return random_band_limited(sp, c.seed, c.band, c.amplitude);
  case SimulationConfig::Velocity::Zero: return VectorField(c.n);
  case SimulationConfig::Velocity::Snapshot:
  {
    VectorField u = from_block<2>(read_block(fs::path(c.velocity_file)));
    if (u.n() != c.n) throw ConfigError("initial.velocity_file", "snapshot grid size differs from grid.N");
    return sp.leray_project(u);
  }
  }
  return VectorField(c.n);
}

}  // namespace

bool logged_step(const SimulationConfig &cfg, std::uint64_t step)
{
  return step == 0 || step % static_cast<std::uint64_t>(cfg.log_every) == 0 || step == cfg.total_steps();
}

Simulation::Simulation(SimulationConfig cfg, const std::optional<fs::path> &checkpoint)
  : cfg_(std::move(cfg)), sp_(std::make_unique<Spectral>((validate_config(cfg_), cfg_.n))),
    model_(model_catalog(cfg_.model, cfg_.params)),
    ages_(build_age_grid(model_.kernel, cfg_.dt, cfg_.eps_tail, cfg_.memory_cap))
{
  if (cfg_.oracle && cfg_.model != "oldroyd-b")
    throw ConfigError("analysis.oracle", "the differential oracle requires model oldroyd-b");
  stepper_ = std::make_unique<FlowStepper>(*sp_, cfg_.eta);

  MonitorSettings ms;
  ms.q = cfg_.q;
  ms.r = cfg_.r;
  ms.mu = cfg_.mu;
  ms.det_tol = cfg_.det_tol;
  ms.norm_tol = cfg_.det_tol;
  ms.s_inf = model_.measure.s_inf();
  ms.s_prime_inf = model_.measure.s_prime_inf();
  ms.tail_error = ages_.tail_error;
  ms.quad_tol = ages_.quad_tol;
  monitor_ = std::make_unique<Monitor>(*sp_, ages_, ms);

  if (checkpoint)
  {
    restore(*checkpoint);
    return;
  }

  state_.u = initial_velocity(cfg_, *sp_);
  state_.t = 0.0;

  HistoryInit init;
  init.mu = cfg_.mu;
  if (cfg_.history == SimulationConfig::History::Sine)
  {
    init.kind = HistoryInit::Kind::Explicit;
    init.fields.assign(ages_.size(), sine_slice(cfg_.n, cfg_.history_amplitude));
  }
  else if (cfg_.history == SimulationConfig::History::Snapshot)
  {
    init.kind = HistoryInit::Kind::Explicit;
    init.fields = history_fields(read_block(fs::path(cfg_.history_file)));
  }
  bool replaced = false;
  history_ = std::make_unique<DeformationHistory>(init_history(init, ages_, cfg_.n, &replaced));
  if (replaced) warnings_.push_back("initial history slice 0 differed from the identity and was reset");

  if (cfg_.oracle)
  {
    oracle_ = OracleState{TensorField2(cfg_.n), cfg_.params.relaxation_time, cfg_.params.polymer_viscosity};
    // The oracle starts from the stress of the initial history.
    oracle_->tau = assemble_stress(*history_, model_.measure, ages_);
  }

  kin_ = make_kinematics(*sp_, state_.u);
  tau_ = assemble_stress(*history_, model_.measure, ages_);
  records_.push_back(monitor_->observe(0.0, state_.u, *history_, tau_));
}

const DiagnosticsRecord &Simulation::step()
{
  const double dt = cfg_.dt;
  state_.t = static_cast<double>(step_) * dt;
  // An even substep count puts a flow state at the midpoint of the step.
  int m = substeps_for(state_.u, sp_->grid(), cfg_.cfl_safety, dt, cfg_.substeps);
  m += m % 2;
  stepper_->advance(state_, tau_, 0.5 * dt, m / 2);
  const Kinematics mid = make_kinematics(*sp_, state_.u);
  stepper_->advance(state_, tau_, 0.5 * dt, m / 2);
  ++step_;
  state_.t = static_cast<double>(step_) * dt;

  Kinematics next = make_kinematics(*sp_, state_.u);
  stretch_advect_step(*history_, *sp_, kin_, mid, next, dt);
  if (oracle_) oldroyd_differential_step(*oracle_, *sp_, kin_, mid, next, dt);
  kin_ = std::move(next);

  tau_ = assemble_stress(*history_, model_.measure, ages_);
  records_.push_back(monitor_->observe(state_.t, state_.u, *history_, tau_));
  return records_.back();
}

double Simulation::oracle_gap() const
{
  if (!oracle_) throw Error(ErrorCode::InvalidArgument, "oracle not enabled");
  TensorField2 diff = tau_;
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t p = 0; p < diff.c[c].size(); ++p) diff.c[c][p] -= oracle_->tau.c[c][p];
  const double den = lq_norm(oracle_->tau, 2.0);
  const double num = lq_norm(diff, 2.0);
  return den > 0.0 ? num / den : num;
}

RunOutcome Simulation::run(std::ostream *csv)
{
  RunOutcome out;
  const bool files = cfg_.write_files;
  const fs::path dir(cfg_.output_dir);
  std::ofstream file_csv;
  if (files)
  {
    fs::create_directories(dir);
    const fs::path path = dir / "diagnostics.csv";
    const bool append = step_ > 0 && fs::exists(path);
    file_csv.open(path, append ? std::ios::app : std::ios::trunc);
    if (!file_csv) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    if (!append) write_csv_header(file_csv);
  }
  auto emit = [&](const DiagnosticsRecord &r) {
    if (csv) write_csv_row(*csv, r);
    if (files) write_csv_row(file_csv, r);
  };
  if (csv) write_csv_header(*csv);
  if (step_ == 0) emit(records_.front());

  const std::uint64_t total = cfg_.total_steps();
  try
  {
    while (step_ < total)
    {
      const DiagnosticsRecord &r = step();
      if (logged_step(cfg_, step_)) emit(r);
      if (files && cfg_.snapshot_every > 0 && step_ % static_cast<std::uint64_t>(cfg_.snapshot_every) == 0)
        write_snapshot(dir / "snapshots");
      if (files && cfg_.checkpoint_every > 0 && step_ % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0)
        write_checkpoint(dir / "checkpoint");
      if (r.flags != 0 && cfg_.fatal_on_violation)
      {
        out.exit_code = kExitViolation;
        out.message = "bound violation at t = " + std::to_string(r.t) + ": " + flag_names(r.flags);
        break;
      }
    }
  }
  catch (const Error &e)
  {
    if (e.code() != ErrorCode::NumericalBlowup && e.code() != ErrorCode::DegenerateDeformation) throw;
    out.exit_code = kExitBlowup;
    out.message = e.what();
  }
  if (files && out.exit_code == kExitOk) write_checkpoint(dir / "checkpoint");
  out.records = records_;
  out.warnings = warnings_;
  return out;
}

// ---------------------------------------------------------------------------

void Simulation::write_snapshot(const fs::path &dir) const
{
  fs::create_directories(dir);
  char stem[64];
  std::snprintf(stem, sizeof stem, "step_%08llu", static_cast<unsigned long long>(step_));
  write_block(dir / (std::string(stem) + "_u.bin"), to_block(state_.u));
  write_block(dir / (std::string(stem) + "_tau.bin"), to_block(tau_));
  if (!cfg_.snapshot_slices.empty())
    write_block(dir / (std::string(stem) + "_history.bin"), history_block(*history_, cfg_.snapshot_slices));
}

void Simulation::write_checkpoint(const fs::path &dir) const
{
  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  // Store each distinct slice buffer once; runs map age nodes to buffers.
  std::map<const TensorField2 *, std::size_t> index;
  std::vector<std::size_t> unique;
  json runs = json::array();
  for (const auto &r : history_->runs())
  {
    const auto &handle = history_->handle(r.begin);
    long long id = -1;
    if (handle != history_->identity())
    {
      auto [it, fresh] = index.emplace(handle.get(), unique.size());
      if (fresh) unique.push_back(r.begin);
      id = static_cast<long long>(it->second);
    }
    runs.push_back({r.begin, r.end, id});
  }
  write_block(tmp / "u.bin", to_block(state_.u));
  if (!unique.empty()) write_block(tmp / "history.bin", history_block(*history_, unique));
  if (oracle_) write_block(tmp / "oracle.bin", to_block(oracle_->tau));

  const auto &mem = monitor_->memory();
  json meta = {
      {"format", "memflow-checkpoint"},
      {"version", kCheckpointVersion},
      {"step", step_},
      {"flow_steps", state_.steps},
      {"n", cfg_.n},
      {"dt", cfg_.dt},
      {"age_nodes", ages_.size()},
      {"runs", runs},
      {"monitor", {{"started", mem.started}, {"t", mem.t}, {"y_value", mem.y_value}, {"y_integrand", mem.y_integrand}}},
      {"oracle", oracle_.has_value()},
      {"config", to_ini(cfg_)},
  };
  {
    std::ofstream os(tmp / "meta.json");
    os << meta.dump(2) << '\n';
    if (!os) throw SnapshotError(0, "cannot write checkpoint metadata");
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

void Simulation::restore(const fs::path &dir)
{
  json meta;
  {
    std::ifstream is(dir / "meta.json");
    if (!is) throw SnapshotError(0, "cannot read " + (dir / "meta.json").string());
    try
    {
      is >> meta;
    }
    catch (const json::exception &e)
    {
      throw SnapshotError(0, std::string("malformed checkpoint metadata: ") + e.what());
    }
  }
  try
  {
    if (meta.at("format") != "memflow-checkpoint" || meta.at("version") != kCheckpointVersion)
      throw SnapshotError(0, "not a supported checkpoint");
    if (meta.at("n").get<int>() != cfg_.n) throw ConfigError("grid.N", "differs from the checkpoint");
    if (meta.at("dt").get<double>() != cfg_.dt) throw ConfigError("time.dt", "differs from the checkpoint");
    if (meta.at("age_nodes").get<std::size_t>() != ages_.size())
      throw ConfigError("memory.eps_tail", "age grid differs from the checkpoint");
    if (meta.at("oracle").get<bool>() != cfg_.oracle)
      throw ConfigError("analysis.oracle", "differs from the checkpoint");

    step_ = meta.at("step").get<std::uint64_t>();
    state_.u = from_block<2>(read_block(dir / "u.bin"));
    state_.steps = meta.at("flow_steps").get<std::uint64_t>();
    state_.t = static_cast<double>(step_) * cfg_.dt;

    history_ = std::make_unique<DeformationHistory>(cfg_.n, ages_.size());
    std::vector<DeformationHistory::Slice> buffers;
    if (fs::exists(dir / "history.bin"))
      for (auto &f : history_fields(read_block(dir / "history.bin")))
        buffers.push_back(std::make_shared<const TensorField2>(std::move(f)));
    for (const auto &r : meta.at("runs"))
    {
      const auto b = r.at(0).get<std::size_t>();
      const auto e = r.at(1).get<std::size_t>();
      const auto id = r.at(2).get<long long>();
      if (e > ages_.size() || b >= e) throw SnapshotError(0, "checkpoint run out of range");
      const auto handle = id < 0 ? history_->identity() : buffers.at(static_cast<std::size_t>(id));
      for (std::size_t j = b; j < e; ++j) history_->set_handle(j, handle);
    }
    history_->set_generation(step_);

    const json &m = meta.at("monitor");
    monitor_->restore({m.at("started").get<bool>(), m.at("t").get<double>(), m.at("y_value").get<double>(),
                       m.at("y_integrand").get<double>()});
  }
  catch (const json::exception &e)
  {
    throw SnapshotError(0, std::string("malformed checkpoint metadata: ") + e.what());
  }
  catch (const std::out_of_range &)
  {
    throw SnapshotError(0, "checkpoint references a missing slice buffer");
  }

  if (cfg_.oracle)
  {
    oracle_ = OracleState{from_block<4>(read_block(dir / "oracle.bin")), cfg_.params.relaxation_time,
                          cfg_.params.polymer_viscosity};
  }
  kin_ = make_kinematics(*sp_, state_.u);
  tau_ = assemble_stress(*history_, model_.measure, ages_);
}

}  // namespace memflow
