#include "mslmb/runner.hpp"

#include "mslmb/metrics.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

namespace mslmb {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!(lbp.tolerance > 0.0)) throw std::invalid_argument("LBP tolerance must be positive");
  if (lbp.max_iterations < 1) throw std::invalid_argument("LBP max iterations must be >= 1");
  if (!(prune >= 0.0 && prune < 1.0)) throw std::invalid_argument("prune threshold must lie in [0,1)");
}

double RunReport::mean_ospa_e(std::size_t first, std::size_t last) const {
  double sum = 0.0;
  for (std::size_t k = first; k <= last; ++k) sum += steps.at(k - 1).ospa_e;
  return sum / static_cast<double>(last - first + 1);
}

double RunReport::mean_ospa_h(std::size_t first, std::size_t last) const {
  double sum = 0.0;
  for (std::size_t k = first; k <= last; ++k) sum += steps.at(k - 1).ospa_h;
  return sum / static_cast<double>(last - first + 1);
}

double RunReport::mean_lbp_iterations() const {
  return diagnostics.lbp_updates == 0
             ? 0.0
             : static_cast<double>(diagnostics.lbp_iterations) / static_cast<double>(diagnostics.lbp_updates);
}

RunTrace run_single(const Scenario& scenario, const RunConfig& config, std::uint64_t seed, int threads,
                    bool compute_metrics) {
  const auto sim = simulate(scenario, seed);
  const auto motion = scenario.motion();
  const auto fusion = config.fusion();
  const auto mode = config.collapse_mode();
  std::vector<std::vector<ReferenceEstimate>> reference;
  if (compute_metrics) reference = optimal_reference(sim, scenario);

  RunTrace trace;
  trace.steps.resize(static_cast<std::size_t>(scenario.duration));
  LMBDensity lmb;
  std::vector<std::vector<Vector>> scans(scenario.sensors.size());
  std::vector<SensorFrame> frames(scenario.sensors.size());
  for (int k = 0; k < scenario.duration; ++k) {
    const auto step = static_cast<std::size_t>(k);
    lmb = predict(lmb, motion, scenario.birth, static_cast<std::uint32_t>(k));
    for (std::size_t s = 0; s < scenario.sensors.size(); ++s) {
      scans[s] = measurement_values(sim.sensors[s].steps[step]);
      frames[s] = {&scenario.sensors[s], scans[s]};
    }

    const auto start = std::chrono::steady_clock::now();
    lmb = multi_sensor_update(lmb, frames, fusion, config.lbp, mode, threads, &trace.diagnostics);
    trace.update_seconds += elapsed_seconds(start);

    lmb = prune(lmb, config.prune);
    if (!compute_metrics) continue;

    const auto estimates = extract_state(lmb);
    std::vector<Vector> est_means;
    std::vector<Gaussian> est_gaussians;
    for (const auto& e : estimates) {
      est_means.push_back(e.mean);
      est_gaussians.push_back(e.gaussian);
    }
    std::vector<Vector> truth_states;
    for (const auto& obj : sim.truth.steps[step]) truth_states.push_back(obj.state);
    std::vector<Gaussian> ref_gaussians;
    for (const auto& r : reference[step]) ref_gaussians.push_back(r.gaussian);

    auto& m = trace.steps[step];
    m.true_card = static_cast<double>(truth_states.size());
    m.est_card = static_cast<double>(estimates.size());
    m.ospa_e = euclidean_position_ospa(est_means, truth_states);
    m.ospa_h = hellinger_ospa(est_gaussians, ref_gaussians);
  }
  return trace;
}

RunReport run_tracking(const Scenario& scenario, const RunConfig& config) {
  config.validate();
  scenario.validate();
  const std::uint64_t base_seed = config.seed.value_or(scenario.seed);
  const int runs = config.runs;
  // Runs in parallel when there are several; otherwise the threads go to the sensors.
  const int outer = std::min(config.threads, runs);
  const int inner = runs == 1 ? config.threads : 1;

  std::vector<RunTrace> traces(static_cast<std::size_t>(runs));
  std::exception_ptr failure;
#pragma omp parallel for num_threads(outer) schedule(dynamic, 1) if (outer > 1)
  for (int i = 0; i < runs; ++i) {
    try {
      traces[static_cast<std::size_t>(i)] =
          run_single(scenario, config, base_seed + static_cast<std::uint64_t>(i), inner);
    } catch (...) {
#pragma omp critical(mslmb_run_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  RunReport report;
  report.filter = config.filter;
  report.runs = runs;
  report.steps.resize(static_cast<std::size_t>(scenario.duration));
  double abs_card_error = 0.0;
  for (const auto& t : traces) {
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      report.steps[k].true_card += t.steps[k].true_card;
      report.steps[k].est_card += t.steps[k].est_card;
      report.steps[k].ospa_e += t.steps[k].ospa_e;
      report.steps[k].ospa_h += t.steps[k].ospa_h;
      abs_card_error += std::abs(t.steps[k].est_card - t.steps[k].true_card);
    }
    report.run_seconds.push_back(t.update_seconds);
    report.diagnostics += t.diagnostics;
  }
  const double scale = 1.0 / static_cast<double>(runs);
  for (auto& s : report.steps) {
    s.true_card *= scale;
    s.est_card *= scale;
    s.ospa_e *= scale;
    s.ospa_h *= scale;
  }
  report.mean_abs_cardinality_error = abs_card_error / static_cast<double>(runs * scenario.duration);
  return report;
}

RunReport run_tracking(const RunConfig& config) { return run_tracking(load_scenario(config.scenario_path), config); }

std::vector<ScalingRow> run_scaling_benchmark(const Scenario& base, const RunConfig& config,
                                              std::span<const std::size_t> sensor_counts,
                                              std::span<const FusionStrategy> filters) {
  config.validate();
  if (base.sensors.empty()) throw ScenarioError("scaling benchmark: scenario has no sensor to replicate");
  const std::uint64_t base_seed = config.seed.value_or(base.seed);
  std::vector<ScalingRow> rows;
  for (const auto s : sensor_counts) {
    if (s < 1) throw std::invalid_argument("scaling benchmark: sensor counts must be >= 1");
    Scenario scenario = base;
    scenario.sensors.assign(s, base.sensors.front());
    for (const auto filter : filters) {
      RunConfig cfg = config;
      cfg.filter = filter;
      cfg.sensor_order.clear();
      cfg.ga_weights.clear();
      double seconds = 0.0;
      for (int i = 0; i < config.runs; ++i) {
        seconds += run_single(scenario, cfg, base_seed + static_cast<std::uint64_t>(i), config.threads, false)
                       .update_seconds;
      }
      rows.push_back({filter, s, seconds / static_cast<double>(config.runs * scenario.duration)});
    }
  }
  return rows;
}

void write_report_csv(const RunReport& report, const std::filesystem::path& dir) {
  auto out = open_csv(dir / (to_string(report.filter) + ".csv"));
  out << "step,true_card,est_card,ospa_e,ospa_h\n";
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    const auto& s = report.steps[k];
    out << k + 1 << ',' << s.true_card << ',' << s.est_card << ',' << s.ospa_e << ',' << s.ospa_h << '\n';
  }
}

void write_summary_csv(std::span<const RunReport> reports, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "filter,runs,mean_ospa_e,mean_ospa_h,mean_abs_card_error,mean_update_seconds,mean_lbp_iterations,"
         "lbp_nonconverged,pu_fallbacks,contradictory_existence\n";
  for (const auto& r : reports) {
    const double seconds =
        std::accumulate(r.run_seconds.begin(), r.run_seconds.end(), 0.0) / static_cast<double>(r.run_seconds.size());
    out << to_string(r.filter) << ',' << r.runs << ',' << r.mean_ospa_e(1, r.steps.size()) << ','
        << r.mean_ospa_h(1, r.steps.size()) << ',' << r.mean_abs_cardinality_error << ',' << seconds << ','
        << r.mean_lbp_iterations() << ',' << r.diagnostics.lbp_nonconverged << ',' << r.diagnostics.pu_fallbacks << ','
        << r.diagnostics.contradictory_existence << '\n';
  }
}

void write_scaling_csv(std::span<const ScalingRow> rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "filter,sensors,seconds_per_step\n";
  for (const auto& r : rows) out << to_string(r.filter) << ',' << r.sensors << ',' << r.seconds_per_step << '\n';
}

}  // namespace mslmb
