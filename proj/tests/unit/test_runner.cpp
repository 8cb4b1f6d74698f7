#include "mslmb/runner.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <string>

using namespace mslmb;

namespace {

Scenario short_accuracy(int duration) {
  auto s = accuracy_scenario();
  s.duration = duration;
  return s;
}

RunConfig config_for(FusionStrategy f, int runs = 1, int threads = 1) {
  RunConfig c;
  c.filter = f;
  c.runs = runs;
  c.threads = threads;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(Runner, EmptyWorldHasZeroError) {
  Scenario s;
  s.duration = 1;
  s.sensors = {{position_sensor(1.0), 0.9, 0.0, s.region.area()}};
  const auto trace = run_single(s, config_for(FusionStrategy::PU), 1, 1);
  ASSERT_EQ(trace.steps.size(), 1u);
  EXPECT_EQ(trace.steps[0].true_card, 0.0);
  EXPECT_EQ(trace.steps[0].est_card, 0.0);
  EXPECT_EQ(trace.steps[0].ospa_e, 0.0);
  EXPECT_EQ(trace.steps[0].ospa_h, 0.0);
}

TEST(Runner, ResultDoesNotDependOnThreadCount) {
  const auto s = short_accuracy(15);
  for (const auto f : {FusionStrategy::PU, FusionStrategy::GA, FusionStrategy::IC}) {
    const auto serial = run_tracking(s, config_for(f, 3, 1));
    const auto parallel = run_tracking(s, config_for(f, 3, 4));
    ASSERT_EQ(serial.steps.size(), parallel.steps.size());
    for (std::size_t k = 0; k < serial.steps.size(); ++k) {
      EXPECT_EQ(serial.steps[k].est_card, parallel.steps[k].est_card);
      EXPECT_EQ(serial.steps[k].ospa_e, parallel.steps[k].ospa_e);
      EXPECT_EQ(serial.steps[k].ospa_h, parallel.steps[k].ospa_h);
    }
    // Sensor-level parallelism inside a single run must not change anything either.
    const auto one = run_single(s, config_for(f), 5, 1);
    const auto many = run_single(s, config_for(f), 5, 2);
    for (std::size_t k = 0; k < one.steps.size(); ++k) EXPECT_EQ(one.steps[k].ospa_e, many.steps[k].ospa_e);
  }
}

TEST(Runner, SensorOrderMattersOnlyForIteratedCorrector) {
  const auto s = short_accuracy(20);
  auto forward = config_for(FusionStrategy::PU);
  auto backward = forward;
  backward.sensor_order = {1, 0};
  for (const auto f : {FusionStrategy::PU, FusionStrategy::GA}) {
    forward.filter = backward.filter = f;
    const auto a = run_single(s, forward, 3, 1);
    const auto b = run_single(s, backward, 3, 1);
    for (std::size_t k = 0; k < a.steps.size(); ++k) EXPECT_EQ(a.steps[k].ospa_e, b.steps[k].ospa_e);
  }
  forward.filter = backward.filter = FusionStrategy::IC;
  const auto a = run_single(s, forward, 3, 1);
  const auto b = run_single(s, backward, 3, 1);
  bool differs = false;
  for (std::size_t k = 0; k < a.steps.size(); ++k) differs = differs || a.steps[k].ospa_h != b.steps[k].ospa_h;
  EXPECT_TRUE(differs);
}

TEST(Runner, ReportShapeAndFiniteness) {
  const auto s = short_accuracy(12);
  const auto report = run_tracking(s, config_for(FusionStrategy::GA, 2));
  ASSERT_EQ(report.steps.size(), 12u);
  EXPECT_EQ(report.run_seconds.size(), 2u);
  for (const auto& st : report.steps) {
    EXPECT_TRUE(std::isfinite(st.ospa_e) && std::isfinite(st.ospa_h) && std::isfinite(st.est_card));
    EXPECT_LE(st.ospa_e, 5.0);
    EXPECT_LE(st.ospa_h, 0.5);
  }
  EXPECT_EQ(report.diagnostics.lbp_updates, 2u * 12u * 2u);
  EXPECT_GT(report.mean_lbp_iterations(), 0.0);
  EXPECT_NEAR(report.mean_ospa_e(1, 12), [&] {
    double t = 0;
    for (const auto& st : report.steps) t += st.ospa_e;
    return t / 12.0;
  }(), 1e-12);
}

TEST(Runner, WritesCsv) {
  const auto s = short_accuracy(4);
  const auto report = run_tracking(s, config_for(FusionStrategy::PU));
  const auto dir = std::filesystem::temp_directory_path() / "mslmb_runner_test";
  write_report_csv(report, dir);
  std::ifstream in(dir / "pu.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,true_card,est_card,ospa_e,ospa_h");
  int rows = 0;
  std::string first;
  while (std::getline(in, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(first.substr(0, 2), "1,");
  std::filesystem::remove_all(dir);
}

TEST(Runner, RejectsBadConfig) {
  const auto s = short_accuracy(2);
  auto c = config_for(FusionStrategy::PU);
  c.runs = 0;
  EXPECT_THROW(run_tracking(s, c), std::invalid_argument);
  c = config_for(FusionStrategy::PU);
  c.prune = 1.0;
  EXPECT_THROW(run_tracking(s, c), std::invalid_argument);
  c = config_for(FusionStrategy::GA);
  c.ga_weights = {0.7, 0.7};
  EXPECT_THROW(run_tracking(s, c), std::invalid_argument);
  c = config_for(FusionStrategy::IC);
  c.sensor_order = {0, 0};
  EXPECT_THROW(run_tracking(s, c), std::invalid_argument);
  EXPECT_THROW(parse_strategy("xyz"), std::invalid_argument);
}

TEST(Runner, ScalingBenchmarkRows) {
  auto s = scaling_scenario(3, 5, 2);
  auto c = config_for(FusionStrategy::PU, 1);
  const std::vector<std::size_t> counts{1, 2};
  const std::vector<FusionStrategy> filters{FusionStrategy::PU, FusionStrategy::IC};
  const auto rows = run_scaling_benchmark(s, c, counts, filters);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_GT(r.seconds_per_step, 0.0);
}
