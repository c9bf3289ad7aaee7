// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <string>

#include "memflow/config.hpp"
#include "memflow/error.hpp"

namespace
{

using namespace memflow;

const std::string kMinimal = R"(
[grid]
N = 64
[time]
dt = 1e-3
T = 1
[fluid]
eta = 1
[model]
name = oldroyd-b
)";

std::string with(const std::string &section, const std::string &line)
{
  std::string s = kMinimal;
  const std::string head = "[" + section + "]\n";
  const auto pos = s.find(head);
  if (pos == std::string::npos) return s + head + line + "\n";
  return s.insert(pos + head.size(), line + "\n");
}

std::string replaced(const std::string &from, const std::string &to)
{
  std::string s = kMinimal;
  return s.replace(s.find(from), from.size(), to);
}

std::string error_key(const std::string &text)
{
  try
  {
    parse_config_string(text);
  }
  catch (const ConfigError &e)
  {
    return e.key();
  }
  return "<accepted>";
}

TEST(Config, MinimalDefaults)
{
  const SimulationConfig c = parse_config_string(kMinimal);
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.dt, 1e-3);
  EXPECT_EQ(c.t_final, 1.0);
  EXPECT_EQ(c.eta, 1.0);
  EXPECT_EQ(c.model, "oldroyd-b");
  EXPECT_EQ(c.q, 8.0);
  EXPECT_EQ(c.r, 4.0);
  EXPECT_EQ(c.mu, 1.0);
  EXPECT_EQ(c.eps_tail, 1e-6);
  EXPECT_EQ(c.substeps, 1);
  EXPECT_EQ(c.velocity, SimulationConfig::Velocity::TaylorGreen);
  EXPECT_EQ(c.history, SimulationConfig::History::Identity);
  EXPECT_FALSE(c.fatal_on_violation);
  EXPECT_EQ(c.total_steps(), 1000u);
}

TEST(Config, ExponentHypothesis)
{
  EXPECT_EQ(error_key(with("analysis", "q = 4\nr = 4")), "analysis.r");
  EXPECT_EQ(error_key(with("analysis", "q = 6\nr = 3")), "analysis.r");
  EXPECT_EQ(error_key(with("analysis", "q = 5\nr = 4")), "<accepted>");
  EXPECT_EQ(error_key(with("analysis", "q = 2.5")), "analysis.q");
}

TEST(Config, Invariants)
{
  EXPECT_EQ(error_key(replaced("N = 64", "N = 48")), "grid.N");
  EXPECT_EQ(error_key(replaced("N = 64", "N = 8")), "grid.N");
  EXPECT_EQ(error_key(replaced("eta = 1", "eta = 0")), "fluid.eta");
  EXPECT_EQ(error_key(replaced("dt = 1e-3", "dt = -1")), "time.dt");
  EXPECT_EQ(error_key(with("memory", "eps_tail = 0")), "memory.eps_tail");
  EXPECT_EQ(error_key(replaced("oldroyd-b", "psm-normalized\nalpha = 1")), "model.alpha");
  EXPECT_EQ(error_key(with("initial", "history = sine\nhistory_amplitude = 1.5")), "initial.history_amplitude");
}

TEST(Config, StrictKeys)
{
  EXPECT_EQ(error_key(with("grid", "M = 3")), "grid.M");
  EXPECT_EQ(error_key(kMinimal + "[solver]\nx = 1\n"), "solver");
  EXPECT_EQ(error_key("[grid]\nN = 64\n[time]\ndt = 1e-3\nT = 1\n[model]\nname = psm-raw\n"), "fluid.eta");
  EXPECT_EQ(error_key(with("time", "substeps = two")), "time.substeps");
  EXPECT_EQ(error_key(replaced("oldroyd-b", "maxwell")), "model.name");
  EXPECT_NE(error_key(with("grid", "N = 32")), "<accepted>");
}

TEST(Config, HistoryTooLong)
{
  try
  {
    parse_config_string(with("memory", "eps_tail = 1e-12\ncap_nodes = 1000"));
    FAIL() << "expected HistoryTooLong";
  }
  catch (const HistoryTooLong &e)
  {
    EXPECT_EQ(e.required_nodes(), 27633u);
    EXPECT_NE(std::string(e.what()).find("27633"), std::string::npos);
  }
}

TEST(Config, RoundTrip)
{
  const SimulationConfig a = parse_config_string(
      with("initial", "velocity = random\nseed = 42\nband = 6\nhistory = sine\nhistory_amplitude = 0.25"));
  const SimulationConfig b = parse_config_string(to_ini(a));
  EXPECT_EQ(to_ini(a), to_ini(b));
  EXPECT_EQ(b.seed, 42u);
  EXPECT_EQ(b.band, 6);
  EXPECT_EQ(b.history_amplitude, 0.25);
}

TEST(Config, MissingFile)
{
  EXPECT_THROW(parse_config("/nonexistent/memflow.ini"), ConfigError);
}

}  // namespace
