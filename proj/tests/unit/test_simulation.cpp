// Copyright 2026 The memflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "memflow/config.hpp"
#include "memflow/error.hpp"
#include "memflow/simulation.hpp"

namespace
{

using namespace memflow;
namespace fs = std::filesystem;

std::string base_ini(const std::string &extra_sections = "")
{
  return "[grid]\nN = 16\n[time]\ndt = 0.02\nT = 0.4\nsubsteps = 2\n[fluid]\neta = 0.1\n"
         "[model]\nname = psm-raw\n[memory]\neps_tail = 1e-3\n" +
         extra_sections;
}

SimulationConfig in_memory(const std::string &text)
{
  SimulationConfig c = parse_config_string(text);
  c.write_files = false;
  return c;
}

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("memflow_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Simulation, QuiescentIsInert)
{
  Simulation sim(in_memory(base_ini("[initial]\nvelocity = zero\n")));
  const RunOutcome out = sim.run();
  EXPECT_EQ(out.exit_code, kExitOk);
  ASSERT_EQ(out.records.size(), 21u);
  // Isotropic rest stress |S(δ)| = √2/3 times the kernel mass.
  const double rest = out.records.front().stress_sup;
  EXPECT_NEAR(rest, std::sqrt(2.0) / 3.0 * (1.0 - sim.ages().tail_error), std::sqrt(2.0) / 3.0 * sim.ages().quad_tol + 1e-12);
  for (const auto &r : out.records)
  {
    EXPECT_EQ(r.y_value, 0.0);
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.stress_sup, rest);
    EXPECT_EQ(r.min_detG, 1.0);
    EXPECT_EQ(r.flags, 0u);
  }
  EXPECT_TRUE(out.warnings.empty());
}

TEST(Simulation, TaylorGreenRunIsClean)
{
  Simulation sim(in_memory(base_ini()));
  const RunOutcome out = sim.run();
  EXPECT_EQ(out.exit_code, kExitOk);
  EXPECT_EQ(sim.step_index(), 20u);
  EXPECT_DOUBLE_EQ(sim.time(), 0.4);
  double y = 0.0;
  for (const auto &r : out.records)
  {
    EXPECT_EQ(r.flags, 0u);
    EXPECT_LE(r.divu_sup, 1e-10);
    EXPECT_GE(r.y_value, y);
    y = r.y_value;
  }
  EXPECT_EQ(out.records.front().y_value, 0.0);
  EXPECT_GT(y, 0.0);
}

TEST(Simulation, FatalViolationExitsThree)
{
  Simulation sim(in_memory(base_ini("[analysis]\ndet_tol = 0\nfatal_on_violation = true\n")));
  const RunOutcome out = sim.run();
  EXPECT_EQ(out.exit_code, kExitViolation);
  EXPECT_NE(out.message.find("determinant"), std::string::npos);
  EXPECT_LT(sim.step_index(), 20u);
}

TEST(Simulation, BlowupExitsTwo)
{
  const std::string ini =
      "[grid]\nN = 16\n[time]\ndt = 0.1\nT = 20\n[fluid]\neta = 0.01\n[model]\nname = oldroyd-b\n"
      "relaxation_time = 1000\n[memory]\neps_tail = 0.9\n[initial]\namplitude = 50\n";
  Simulation sim(in_memory(ini));
  const RunOutcome out = sim.run();
  EXPECT_EQ(out.exit_code, kExitBlowup);
  EXPECT_FALSE(out.message.empty());
}

TEST(Simulation, SineHistoryWarnsAboutSliceZero)
{
  Simulation sim(in_memory(base_ini("[analysis]\nmu = 0.25\n[initial]\nhistory = sine\nhistory_amplitude = 0.3\nvelocity = zero\n")));
  ASSERT_EQ(sim.warnings().size(), 1u);
  EXPECT_NE(sim.warnings()[0].find("slice 0"), std::string::npos);
  EXPECT_GT(sim.records().front().stress_sup, 0.0);
}

TEST(Simulation, OracleGapIsSmall)
{
  const std::string ini =
      "[grid]\nN = 16\n[time]\ndt = 0.02\nT = 0.4\nsubsteps = 2\n[fluid]\neta = 0.1\n[model]\nname = oldroyd-b\n"
      "[memory]\neps_tail = 1e-8\n[analysis]\noracle = true\n";
  Simulation sim(in_memory(ini));
  EXPECT_EQ(sim.run().exit_code, kExitOk);
  ASSERT_TRUE(sim.has_oracle());
  EXPECT_LT(sim.oracle_gap(), 1e-3);
}

TEST(Simulation, RestartMatchesStraightRun)
{
  const fs::path a = scratch("straight"), b = scratch("restart");
  const std::string sections = "[analysis]\nmu = 0.5\n[initial]\nhistory = sine\nhistory_amplitude = 0.2\n";

  SimulationConfig straight = parse_config_string(base_ini(sections));
  straight.output_dir = a.string();
  Simulation s1(straight);
  ASSERT_EQ(s1.run().exit_code, kExitOk);

  SimulationConfig half = straight;
  half.output_dir = b.string();
  half.t_final = 0.2;
  {
    Simulation s2(half);
    ASSERT_EQ(s2.run().exit_code, kExitOk);
  }
  SimulationConfig rest = half;
  rest.t_final = 0.4;
  Simulation s3(rest, b / "checkpoint");
  EXPECT_EQ(s3.step_index(), 10u);
  ASSERT_EQ(s3.run().exit_code, kExitOk);

  const auto &ra = s1.records();
  const auto &rb = s3.records();
  ASSERT_EQ(rb.back().t, ra.back().t);
  const DiagnosticsRecord &x = ra.back(), &y = rb.back();
  EXPECT_NEAR(x.stress_sup, y.stress_sup, 1e-14);
  EXPECT_NEAR(x.min_detG, y.min_detG, 1e-14);
  EXPECT_NEAR(x.energy, y.energy, 1e-14);
  EXPECT_NEAR(x.y_value, y.y_value, 1e-14);
  EXPECT_NEAR(x.stress_grad_norm, y.stress_grad_norm, 1e-14);

  auto lines = [](const fs::path &p) {
    std::ifstream is(p);
    std::vector<std::string> v;
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
  };
  const auto la = lines(a / "diagnostics.csv"), lb = lines(b / "diagnostics.csv");
  ASSERT_EQ(la.size(), 22u);
  EXPECT_EQ(la, lb);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Simulation, CheckpointMismatchRejected)
{
  const fs::path d = scratch("mismatch");
  SimulationConfig c = parse_config_string(base_ini());
  c.output_dir = d.string();
  c.t_final = 0.04;
  {
    Simulation s(c);
    ASSERT_EQ(s.run().exit_code, kExitOk);
  }
  SimulationConfig other = c;
  other.dt = 0.01;
  EXPECT_THROW(Simulation s(other, d / "checkpoint"), ConfigError);
  fs::remove_all(d);
}

TEST(Simulation, DeterministicAcrossThreadCounts)
{
  const std::string ini = base_ini("[initial]\nvelocity = random\nseed = 3\nband = 3\n");
  auto csv = [&](int threads) {
    omp_set_num_threads(threads);
    Simulation sim(in_memory(ini));
    std::ostringstream os;
    sim.run(&os);
    return os.str();
  };
  const int saved = omp_get_max_threads();
  const std::string one = csv(1), two = csv(2), four = csv(4);
  omp_set_num_threads(saved);
  EXPECT_EQ(one, two);
  EXPECT_EQ(one, four);
}

TEST(LoggedStep, Schedule)
{
  SimulationConfig c = parse_config_string(base_ini("[analysis]\nlog_every = 3\n"));
  EXPECT_TRUE(logged_step(c, 0));
  EXPECT_FALSE(logged_step(c, 1));
  EXPECT_TRUE(logged_step(c, 3));
  EXPECT_TRUE(logged_step(c, 20));
}

}  // namespace
