#pragma once

#include "mslmb/gaussian.hpp"
#include "mslmb/lbp.hpp"
#include "mslmb/lmb.hpp"

#include <cstdint>
#include <map>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mslmb {

using Rng = std::mt19937_64;

struct Region {
  double x_min = -100.0;
  double x_max = 100.0;
  double y_min = -100.0;
  double y_max = 100.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

/// Scenario file or value violates an invariant.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Scenario {
  int duration = 100;
  double dt = 1.0;
  double process_intensity = 0.1;
  double survival = 0.95;
  Region region;
  BirthModel birth;
  std::vector<SensorModel> sensors;
  std::uint64_t seed = 1;
  /// When set, every run shares the truth drawn from this seed; only measurements vary.
  std::optional<std::uint64_t> truth_seed;

  /// Every birth location spawns exactly one object at step 0; nobody dies or is born later.
  bool fixed_cardinality = false;
  /// Objects alive at step 0 in addition to births, with the covariance the
  /// reference filter starts from.
  std::vector<Vector> initial_objects;
  Matrix initial_covariance;

  MotionModel motion() const;
  void validate() const;
};

/// Two-sensor accuracy setup: four birth sites in a 200 m square, lambda = 20.
Scenario accuracy_scenario();

/// Fixed-cardinality runtime setup: `objects` random birth sites in a 1 km
/// square, 20 ms steps, P_D = 1, one base sensor.
Scenario scaling_scenario(int objects = 20, int duration = 300, std::uint64_t seed = 1);

Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

struct TruthObject {
  Label label;
  Vector state;
};

struct GroundTruth {
  std::vector<std::vector<TruthObject>> steps;
  /// Density each object was drawn from, keyed by its label: the reference filter's prior.
  std::map<Label, Gaussian> initial_prior;
};

struct Measurement {
  Vector z;
  std::optional<Label> origin;  ///< empty for clutter
};

/// One sensor's scans: steps[k] is the unordered scan at step k.
struct MeasurementFrame {
  std::vector<std::vector<Measurement>> steps;
};

std::vector<Vector> measurement_values(const std::vector<Measurement>& scan);

/// splitmix64 of master ^ stream constant. Stream 0 drives the truth, stream
/// s + 1 drives sensor s, so adding sensors never changes earlier draws.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

GroundTruth generate_truth(const Scenario& scenario, Rng& rng);
MeasurementFrame generate_measurements(const GroundTruth& truth, const SensorModel& sensor, const Region& region,
                                       Rng& rng);

struct Simulation {
  GroundTruth truth;
  std::vector<MeasurementFrame> sensors;
};

Simulation simulate(const Scenario& scenario, std::uint64_t seed);

/// Rows of "step,label,values..." and "step,sensor,values...".
void write_truth_csv(const GroundTruth& truth, const std::filesystem::path& path);
void write_measurements_csv(const Simulation& sim, const std::filesystem::path& path);

}  // namespace mslmb
