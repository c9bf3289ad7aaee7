// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "memflow/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "memflow/error.hpp"

namespace memflow
{

namespace pt = boost::property_tree;

namespace
{

const std::map<std::string, std::set<std::string>> &schema()
{
  static const std::map<std::string, std::set<std::string>> s = {
      {"grid", {"N"}},
      {"time", {"dt", "T", "substeps", "cfl_safety"}},
      {"fluid", {"eta"}},
      {"model",
       {"name", "relaxation_time", "polymer_viscosity", "alpha", "beta", "modes", "damping", "damping_derivative",
        "mode_weights", "mode_times"}},
      {"memory", {"eps_tail", "cap_nodes"}},
      {"analysis", {"q", "r", "mu", "det_tol", "log_every", "fatal_on_violation", "oracle"}},
      {"initial",
       {"velocity", "amplitude", "seed", "band", "velocity_file", "history", "history_amplitude", "history_file"}},
      {"output", {"dir", "snapshot_every", "checkpoint_every", "snapshot_slices", "write_files"}},
  };
  return s;
}

class Reader
{
public:
  explicit Reader(const pt::ptree &tree) : tree_(tree) {}

  bool has(const std::string &key) const { return tree_.get_child_optional(pt::ptree::path_type(key, '.')).has_value(); }

  std::string text(const std::string &key) const
  {
    return tree_.get<std::string>(pt::ptree::path_type(key, '.'));
  }

  double number(const std::string &key) const
  {
    const std::string v = text(key);
    try
    {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return d;
    }
    catch (const std::exception &)
    {
      throw ConfigError(key, "expected a number, got '" + v + "'");
    }
  }

  long long integer(const std::string &key) const
  {
    const double d = number(key);
    if (d != std::floor(d) || std::fabs(d) > 9.0e15) throw ConfigError(key, "expected an integer");
    return static_cast<long long>(d);
  }

  bool boolean(const std::string &key) const
  {
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected a boolean, got '" + v + "'");
  }

  std::vector<double> numbers(const std::string &key) const
  {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ','))
    {
      try
      {
        out.push_back(std::stod(item));
      }
      catch (const std::exception &)
      {
        throw ConfigError(key, "expected a comma-separated list of numbers");
      }
    }
    return out;
  }

  template <class T>
  void opt(const std::string &key, T &dst) const
  {
    if (!has(key)) return;
    if constexpr (std::is_same_v<T, double>) dst = number(key);
    else if constexpr (std::is_same_v<T, bool>) dst = boolean(key);
    else if constexpr (std::is_same_v<T, std::string>) dst = text(key);
    else dst = static_cast<T>(integer(key));
  }

private:
  const pt::ptree &tree_;
};

void require(const Reader &rd, const std::string &key)
{
  if (!rd.has(key)) throw ConfigError(key, "required key is missing");
}

SimulationConfig from_tree(const pt::ptree &tree)
{
  for (const auto &[section, body] : tree)
  {
    const auto it = schema().find(section);
    if (it == schema().end())
    {
      if (!body.data().empty()) throw ConfigError(section, "keys must appear inside a section");
      throw ConfigError(section, "unknown section");
    }
    for (const auto &[key, value] : body)
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
  }

  const Reader rd(tree);
  for (const char *k : {"grid.N", "time.dt", "time.T", "fluid.eta", "model.name"}) require(rd, k);

  SimulationConfig c;
  c.n = static_cast<int>(rd.integer("grid.N"));
  c.dt = rd.number("time.dt");
  c.t_final = rd.number("time.T");
  rd.opt("time.substeps", c.substeps);
  rd.opt("time.cfl_safety", c.cfl_safety);
  c.eta = rd.number("fluid.eta");

  c.model = rd.text("model.name");
  rd.opt("model.relaxation_time", c.params.relaxation_time);
  rd.opt("model.polymer_viscosity", c.params.polymer_viscosity);
  if (rd.has("model.alpha")) c.params.alpha = rd.number("model.alpha");
  rd.opt("model.beta", c.params.beta);
  rd.opt("model.modes", c.params.doi_edwards_modes);
  rd.opt("model.damping", c.params.damping);
  rd.opt("model.damping_derivative", c.params.damping_derivative);
  if (rd.has("model.mode_weights")) c.params.mode_weights = rd.numbers("model.mode_weights");
  if (rd.has("model.mode_times")) c.params.mode_times = rd.numbers("model.mode_times");

  rd.opt("memory.eps_tail", c.eps_tail);
  if (rd.has("memory.cap_nodes"))
  {
    const long long cap = rd.integer("memory.cap_nodes");
    if (cap < 2) throw ConfigError("memory.cap_nodes", "must be at least 2");
    c.memory_cap = static_cast<std::size_t>(cap);
  }

  rd.opt("analysis.q", c.q);
  rd.opt("analysis.r", c.r);
  rd.opt("analysis.mu", c.mu);
  rd.opt("analysis.det_tol", c.det_tol);
  rd.opt("analysis.log_every", c.log_every);
  rd.opt("analysis.fatal_on_violation", c.fatal_on_violation);
  rd.opt("analysis.oracle", c.oracle);

  if (rd.has("initial.velocity"))
  {
    const std::string v = rd.text("initial.velocity");
    if (v == "taylor-green") c.velocity = SimulationConfig::Velocity::TaylorGreen;
    else if (v == "random") c.velocity = SimulationConfig::Velocity::Random;
    else if (v == "snapshot") c.velocity = SimulationConfig::Velocity::Snapshot;
    else if (v == "zero") c.velocity = SimulationConfig::Velocity::Zero;
    else throw ConfigError("initial.velocity", "expected taylor-green, random, snapshot or zero");
  }
  rd.opt("initial.amplitude", c.amplitude);
  if (rd.has("initial.seed"))
  {
    const long long s = rd.integer("initial.seed");
    if (s < 0) throw ConfigError("initial.seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  rd.opt("initial.band", c.band);
  rd.opt("initial.velocity_file", c.velocity_file);
  if (rd.has("initial.history"))
  {
    const std::string v = rd.text("initial.history");
    if (v == "identity") c.history = SimulationConfig::History::Identity;
    else if (v == "sine") c.history = SimulationConfig::History::Sine;
    else if (v == "snapshot") c.history = SimulationConfig::History::Snapshot;
    else throw ConfigError("initial.history", "expected identity, sine or snapshot");
  }
  rd.opt("initial.history_amplitude", c.history_amplitude);
  rd.opt("initial.history_file", c.history_file);

  rd.opt("output.dir", c.output_dir);
  rd.opt("output.snapshot_every", c.snapshot_every);
  rd.opt("output.checkpoint_every", c.checkpoint_every);
  rd.opt("output.write_files", c.write_files);
  if (rd.has("output.snapshot_slices"))
    for (double v : rd.numbers("output.snapshot_slices"))
    {
      if (v < 0 || v != std::floor(v)) throw ConfigError("output.snapshot_slices", "expected slice indices");
      c.snapshot_slices.push_back(static_cast<std::size_t>(v));
    }

  validate_config(c);
  return c;
}

std::string num(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t SimulationConfig::total_steps() const
{
  return static_cast<std::uint64_t>(std::llround(std::ceil(t_final / dt - 1e-9)));
}

void validate_config(const SimulationConfig &c)
{
  if (c.n < 16 || (c.n & (c.n - 1)) != 0) throw ConfigError("grid.N", "must be a power of two >= 16");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("time.dt", "must be positive");
  if (!(c.t_final >= 0.0) || !std::isfinite(c.t_final)) throw ConfigError("time.T", "must be nonnegative");
  if (c.substeps < 1) throw ConfigError("time.substeps", "must be at least 1");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) throw ConfigError("time.cfl_safety", "must lie in (0, 1]");
  if (!(c.eta > 0.0) || !std::isfinite(c.eta)) throw ConfigError("fluid.eta", "must be positive");
  if (!(c.eps_tail > 0.0 && c.eps_tail < 1.0)) throw ConfigError("memory.eps_tail", "must lie in (0, 1)");
  if (!(c.q >= 1.0) || c.q != std::floor(c.q) || !(c.r >= 1.0) || c.r != std::floor(c.r))
    throw ConfigError("analysis.q", "q and r must be positive integers");
  if (!(1.0 / c.q + 1.0 / c.r < 0.5)) throw ConfigError("analysis.r", "exponents must satisfy 1/q + 1/r < 1/2");
  if (!(c.mu > 0.0)) throw ConfigError("analysis.mu", "must be positive");
  if (!(c.det_tol >= 0.0)) throw ConfigError("analysis.det_tol", "must be nonnegative");
  if (c.log_every < 1) throw ConfigError("analysis.log_every", "must be at least 1");
  if (c.band < 1 || c.band > c.n / 3) throw ConfigError("initial.band", "must lie in [1, N/3]");
  if (!(c.amplitude >= 0.0)) throw ConfigError("initial.amplitude", "must be nonnegative");
  if (c.velocity == SimulationConfig::Velocity::Snapshot && c.velocity_file.empty())
    throw ConfigError("initial.velocity_file", "required when initial.velocity = snapshot");
  if (c.history == SimulationConfig::History::Snapshot && c.history_file.empty())
    throw ConfigError("initial.history_file", "required when initial.history = snapshot");
  if (c.history == SimulationConfig::History::Sine && !(std::fabs(c.history_amplitude) < 1.0))
    throw ConfigError("initial.history_amplitude", "must lie in (-1, 1)");
  if (c.snapshot_every < 0) throw ConfigError("output.snapshot_every", "must be nonnegative");
  if (c.checkpoint_every < 0) throw ConfigError("output.checkpoint_every", "must be nonnegative");

  ConstitutiveModel model = [&] {
    try
    {
      return model_catalog(c.model, c.params);
    }
    catch (const ConfigError &e)
    {
      // Catalog keys are relative to the [model] section.
      std::string what = e.what();
      if (!e.key().empty()) what = what.substr(e.key().size() + 2);
      throw ConfigError(e.key().empty() ? "model.name" : "model." + e.key(), what);
    }
    catch (const Error &e)
    {
      throw ConfigError("model.name", e.what());
    }
  }();
  const std::size_t need = required_age_nodes(model.kernel, c.dt, c.eps_tail);
  if (need > c.memory_cap) throw HistoryTooLong(need, c.memory_cap);
  for (std::size_t j : c.snapshot_slices)
    if (j >= need) throw ConfigError("output.snapshot_slices", "slice index beyond the age grid");
}

SimulationConfig parse_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

SimulationConfig parse_config_string(const std::string &text)
{
  pt::ptree tree;
  std::istringstream in(text);
  try
  {
    pt::read_ini(in, tree);
  }
  catch (const pt::ini_parser_error &e)
  {
    throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return from_tree(tree);
}

std::string to_ini(const SimulationConfig &c)
{
  std::ostringstream os;
  auto list = [](const std::vector<double> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
  };
  os << "[grid]\nN = " << c.n << "\n\n";
  os << "[time]\ndt = " << num(c.dt) << "\nT = " << num(c.t_final) << "\nsubsteps = " << c.substeps
     << "\ncfl_safety = " << num(c.cfl_safety) << "\n\n";
  os << "[fluid]\neta = " << num(c.eta) << "\n\n";
  os << "[model]\nname = " << c.model << "\nrelaxation_time = " << num(c.params.relaxation_time)
     << "\npolymer_viscosity = " << num(c.params.polymer_viscosity) << "\nbeta = " << num(c.params.beta)
     << "\nmodes = " << c.params.doi_edwards_modes << "\n";
  if (c.params.alpha) os << "alpha = " << num(*c.params.alpha) << "\n";
  if (!c.params.damping.empty()) os << "damping = " << c.params.damping << "\n";
  if (!c.params.damping_derivative.empty()) os << "damping_derivative = " << c.params.damping_derivative << "\n";
  if (!c.params.mode_weights.empty()) os << "mode_weights = " << list(c.params.mode_weights) << "\n";
  if (!c.params.mode_times.empty()) os << "mode_times = " << list(c.params.mode_times) << "\n";
  os << "\n[memory]\neps_tail = " << num(c.eps_tail) << "\ncap_nodes = " << c.memory_cap << "\n\n";
  os << "[analysis]\nq = " << num(c.q) << "\nr = " << num(c.r) << "\nmu = " << num(c.mu)
     << "\ndet_tol = " << num(c.det_tol) << "\nlog_every = " << c.log_every
     << "\nfatal_on_violation = " << (c.fatal_on_violation ? "true" : "false")
     << "\noracle = " << (c.oracle ? "true" : "false") << "\n\n";
  static const char *kVel[] = {"taylor-green", "random", "snapshot", "zero"};
  static const char *kHist[] = {"identity", "sine", "snapshot"};
  os << "[initial]\nvelocity = " << kVel[static_cast<int>(c.velocity)] << "\namplitude = " << num(c.amplitude)
     << "\nseed = " << c.seed << "\nband = " << c.band << "\n";
  if (!c.velocity_file.empty()) os << "velocity_file = " << c.velocity_file << "\n";
  os << "history = " << kHist[static_cast<int>(c.history)] << "\nhistory_amplitude = " << num(c.history_amplitude)
     << "\n";
  if (!c.history_file.empty()) os << "history_file = " << c.history_file << "\n";
  os << "\n[output]\ndir = " << c.output_dir << "\nsnapshot_every = " << c.snapshot_every
     << "\ncheckpoint_every = " << c.checkpoint_every << "\nwrite_files = " << (c.write_files ? "true" : "false")
     << "\n";
  if (!c.snapshot_slices.empty())
  {
    os << "snapshot_slices = ";
    for (std::size_t i = 0; i < c.snapshot_slices.size(); ++i) os << (i ? "," : "") << c.snapshot_slices[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace memflow
