#pragma once

#include "mslmb/fusion.hpp"
#include "mslmb/lbp.hpp"
#include "mslmb/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace mslmb {

struct RunConfig {
  std::filesystem::path scenario_path;
  FusionStrategy filter = FusionStrategy::PU;
  int runs = 1;
  std::optional<std::uint64_t> seed;  ///< defaults to the scenario seed
  int threads = 1;
  std::optional<CollapseMode> collapse;
  LbpOptions lbp;
  double prune = 1e-4;
  std::filesystem::path out;
  std::vector<std::size_t> sensor_order;
  std::vector<double> ga_weights;

  void validate() const;
  FusionConfig fusion() const { return {filter, ga_weights, sensor_order}; }
  CollapseMode collapse_mode() const { return collapse.value_or(default_collapse(filter)); }
};

struct StepMetrics {
  double true_card = 0.0;
  double est_card = 0.0;
  double ospa_e = 0.0;
  double ospa_h = 0.0;
};

/// One Monte-Carlo run.
struct RunTrace {
  std::vector<StepMetrics> steps;
  double update_seconds = 0.0;  ///< measurement update + merge only
  FusionDiagnostics diagnostics;
};

struct RunReport {
  FusionStrategy filter = FusionStrategy::PU;
  int runs = 0;
  std::vector<StepMetrics> steps;  ///< means over runs
  std::vector<double> run_seconds;
  double mean_abs_cardinality_error = 0.0;
  FusionDiagnostics diagnostics;

  /// Mean of a per-step column over 1-based steps [first, last].
  double mean_ospa_e(std::size_t first, std::size_t last) const;
  double mean_ospa_h(std::size_t first, std::size_t last) const;
  double mean_lbp_iterations() const;
};

/// Simulate with `seed` and filter the result. `threads` feeds the per-sensor updates.
RunTrace run_single(const Scenario& scenario, const RunConfig& config, std::uint64_t seed, int threads,
                    bool compute_metrics = true);

/// Monte-Carlo runs with seeds seed + i, executed concurrently when runs > 1 and
/// reduced in run order, so the result is independent of the thread count.
RunReport run_tracking(const Scenario& scenario, const RunConfig& config);
RunReport run_tracking(const RunConfig& config);

struct ScalingRow {
  FusionStrategy filter;
  std::size_t sensors;
  double seconds_per_step;  ///< mean update + merge wall clock
};

/// Replicates the scenario's first sensor S times for each S and times each
/// filter with runs executed one after another.
std::vector<ScalingRow> run_scaling_benchmark(const Scenario& base, const RunConfig& config,
                                              std::span<const std::size_t> sensor_counts,
                                              std::span<const FusionStrategy> filters);

/// <dir>/<filter>.csv with step,true_card,est_card,ospa_e,ospa_h (1-based steps).
void write_report_csv(const RunReport& report, const std::filesystem::path& dir);
void write_summary_csv(std::span<const RunReport> reports, const std::filesystem::path& path);
void write_scaling_csv(std::span<const ScalingRow> rows, const std::filesystem::path& path);

}  // namespace mslmb
