// Copyright 2026 The wpmec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>

#include "testing.hpp"

namespace wpmec {
namespace {

TEST(Geometry, Validation) {
  Geometry g = testing::setup_geometry(3);
  EXPECT_NO_THROW(g.validate(3));
  EXPECT_THROW(g.validate(2), InputError);
  g.d_user_helper[1] = 0;
  EXPECT_THROW(g.validate(3), InputError);
  g = testing::setup_geometry(3);
  g.pathloss_ref = 2;
  EXPECT_THROW(g.validate(3), InputError);
  EXPECT_DOUBLE_EQ(testing::setup_geometry(1).gain(5.0), 8e-6);
}

TEST(SampleChannels, MeanPowerGain) {
  const Geometry geom = testing::setup_geometry(0);
  const Instance tmpl = testing::setup_template(1, 0);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_channels(geom, tmpl, i).g[0].squaredNorm();
  EXPECT_NEAR(sum / n, 8e-6, 0.02 * 8e-6);
}

TEST(SampleChannels, PeerGainIsExponential) {
  const Geometry geom = testing::setup_geometry(1);  // user-helper distance 2 m
  const Instance tmpl = testing::setup_template(1, 1);
  const double mean = 1e-3 / 8.0;
  std::vector<double> h;
  for (int i = 0; i < 10000; ++i) h.push_back(sample_channels(geom, tmpl, 7'000'000 + i).h[1]);
  std::sort(h.begin(), h.end());
  double D = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double F = 1.0 - std::exp(-h[i] / mean);
    D = std::max({D, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  EXPECT_LT(D, 1.628 / std::sqrt(n));  // 1% critical value
}

TEST(SampleChannels, Deterministic) {
  const Geometry geom = testing::setup_geometry(3);
  const Instance tmpl = testing::setup_template(4, 3);
  const Instance a = sample_channels(geom, tmpl, 99), b = sample_channels(geom, tmpl, 99);
  const Instance c = sample_channels(geom, tmpl, 100);
  for (int k = 0; k <= 3; ++k) {
    EXPECT_EQ(a.g[k], b.g[k]);
    EXPECT_EQ(a.h[k], b.h[k]);
    EXPECT_NE(a.g[k], c.g[k]);
  }
}

TEST(SampleChannels, AddingHelpersKeepsEarlierDraws) {
  const Instance one = sample_channels(testing::setup_geometry(1), testing::setup_template(4, 1), 5);
  const Instance three = sample_channels(testing::setup_geometry(3), testing::setup_template(4, 3), 5);
  EXPECT_EQ(one.g[0], three.g[0]);
  EXPECT_EQ(one.g[1], three.g[1]);
  EXPECT_EQ(one.h[1], three.h[1]);
}

TEST(Parsing, Names) {
  EXPECT_EQ(parse_scheme("equal_time"), Scheme::kEqualTime);
  EXPECT_STREQ(to_string(Scheme::kLocalOnly), "local_only");
  EXPECT_EQ(parse_sweep_var("d_user_helpers"), SweepVar::kUserHelperDistance);
  EXPECT_STREQ(to_string(SweepVar::kEtHelperDistance), "d_et_helpers");
  EXPECT_THROW(parse_scheme("greedy"), InputError);
  EXPECT_THROW(parse_sweep_var("B"), InputError);
}

TEST(SweepConfig, Validation) {
  SweepConfig c;
  EXPECT_THROW(c.validate(), InputError);
  c.values = {0.1, 0.05};
  EXPECT_THROW(c.validate(), InputError);
  c.values = {0.05, 0.1};
  c.trials = 0;
  EXPECT_THROW(c.validate(), InputError);
  c.trials = 1;
  EXPECT_NO_THROW(c.validate());
}

TEST(RunSweep, OneRowPerScheme) {
  SweepConfig c;
  c.values = {0.1};
  const SweepResult r = run_sweep(c, testing::setup_template(4, 3), testing::setup_geometry(3));
  ASSERT_EQ(r.rows.size(), 3u);
  for (const SweepRow& row : r.rows) {
    EXPECT_EQ(row.trials, 1);
    EXPECT_EQ(row.failures, 0);
    EXPECT_EQ(row.stderr_bits, 0.0);
  }
  EXPECT_TRUE(std::isnan(r.rows[2].mean_gap));
  EXPECT_GE(r.rows[0].mean_bits, r.rows[1].mean_bits);
}

TEST(RunSweep, DeterministicAcrossThreadCounts) {
  SweepConfig c;
  c.variable = SweepVar::kUserHelperDistance;
  c.values = {2, 6};
  c.trials = 4;
  c.seed = 77;
  c.threads = 1;
  const Instance base = testing::setup_template(4, 3, 1e-3);
  const Geometry geom = testing::setup_geometry(3);
  const SweepResult a = run_sweep(c, base, geom);
  c.threads = 3;
  const SweepResult b = run_sweep(c, base, geom);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].objective, b.records[i].objective);
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].mean_bits, b.rows[i].mean_bits);
    EXPECT_EQ(a.rows[i].stderr_bits, b.rows[i].stderr_bits);
  }
}

// Every trial sees the same channel draw at every sweep value.
TEST(RunSweep, CommonRandomNumbers) {
  SweepConfig c;
  c.values = {0.05, 0.1};
  c.trials = 3;
  c.schemes = {Scheme::kLocalOnly};
  const SweepResult r = run_sweep(c, testing::setup_template(4, 3), testing::setup_geometry(3));
  for (int t = 0; t < 3; ++t) {
    const double a = r.records[t].objective, b = r.records[3 + t].objective;
    // Harvested energy is linear in T, so l0 = cbrt(E T^2 / (xi C^3)) is too.
    EXPECT_NEAR(b / a, 2.0, 1e-12);
  }
}

TEST(RunSweep, RecordsAreFeasibleAndOrdered) {
  SweepConfig c;
  c.values = {0.04, 0.1};
  c.trials = 5;
  c.seed = 3;
  const Instance base = testing::setup_template(4, 3);
  const Geometry geom = testing::setup_geometry(3);
  const SweepResult r = run_sweep(c, base, geom);
  for (std::size_t i = 0; i < r.records.size(); i += 3) {
    const TrialRecord& p = r.records[i];
    ASSERT_TRUE(p.ok);
    const Instance inst = sweep_instance(c, c.values[p.value_index], base, geom, p.seed);
    EXPECT_TRUE(check_feasible(inst, solve_proposed(inst).solution, 1e-9).feasible);
    EXPECT_GE(p.objective, r.records[i + 1].objective * (1 - 1e-6));
    EXPECT_GE(p.objective, r.records[i + 2].objective * (1 - 1e-6));
  }
}

TEST(RunSweep, FailuresAreRecordedPerRow) {
  SweepConfig c;
  c.values = {0.1};
  c.trials = 2;
  Instance base = testing::setup_template(4, 3);
  base.xi[2] = -1;
  const SweepResult r = run_sweep(c, base, testing::setup_geometry(3));
  EXPECT_EQ(r.rows[0].failures, 2);
  EXPECT_EQ(r.rows[1].failures, 2);
  EXPECT_EQ(r.records[0].error, "error");
  EXPECT_FALSE(r.records[0].ok);
}

TEST(SweepThreads, EnvironmentOverride) {
  setenv("WPMEC_THREADS", "5", 1);
  EXPECT_EQ(sweep_threads(2), 5);
  unsetenv("WPMEC_THREADS");
  EXPECT_EQ(sweep_threads(2), 2);
  EXPECT_GE(sweep_threads(0), 1);
}

}  // namespace
}  // namespace wpmec
