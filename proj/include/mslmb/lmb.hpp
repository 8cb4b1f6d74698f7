#pragma once

#include "mslmb/gaussian.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mslmb {

/// Track identity (birth step, index within that step). Ordered lexicographically.
struct Label {
  std::uint32_t birth_time = 0;
  std::uint32_t index = 1;

  auto operator<=>(const Label&) const = default;
};

std::string to_string(const Label& label);

struct Track {
  Label label;
  double existence;
  Gaussian spatial;
};

/// Labelled multi-Bernoulli density: one Bernoulli track per distinct label.
class LMBDensity {
 public:
  using Map = std::map<Label, Track>;

  LMBDensity() = default;
  explicit LMBDensity(std::vector<Track> tracks);

  /// Throws std::invalid_argument on a duplicate label or existence outside [0,1].
  void insert(Track track);

  std::size_t size() const { return tracks_.size(); }
  bool empty() const { return tracks_.empty(); }
  bool contains(const Label& label) const { return tracks_.contains(label); }
  const Track& at(const Label& label) const { return tracks_.at(label); }

  Map::const_iterator begin() const { return tracks_.begin(); }
  Map::const_iterator end() const { return tracks_.end(); }

  /// Tracks in label order.
  std::vector<Track> tracks() const;
  std::vector<Label> labels() const;
  std::vector<double> existence() const;
  double expected_cardinality() const;

  bool same_labels(const LMBDensity& other) const;

 private:
  Map tracks_;
};

struct BirthLocation {
  double existence;
  Gaussian spatial;
};

class BirthModel {
 public:
  BirthModel() = default;
  /// Each existence must lie in (0,1).
  explicit BirthModel(std::vector<BirthLocation> locations);

  const std::vector<BirthLocation>& locations() const { return locations_; }
  std::size_t size() const { return locations_.size(); }

 private:
  std::vector<BirthLocation> locations_;
};

struct MotionModel {
  LinearGaussianMap map;
  double survival;  ///< constant P_S in [0,1]
};

/// Chapman-Kolmogorov step: survivors get r * P_S and a predicted spatial
/// density, then birth tracks labelled (step, 1..|B|) are appended.
LMBDensity predict(const LMBDensity& lmb, const MotionModel& motion, const BirthModel& birth, std::uint32_t step);

/// Distribution of the number of existing objects (Poisson-binomial), index n = P(|X| = n).
std::vector<double> cardinality_distribution(const LMBDensity& lmb);
std::vector<double> cardinality_distribution(const std::vector<double>& existence);

LMBDensity prune(const LMBDensity& lmb, double threshold);

struct StateEstimate {
  Label label;
  Vector mean;
  Gaussian gaussian;
};

/// MAP cardinality (ties to the smaller count), then that many tracks with the
/// largest existence (ties to the smaller label).
std::vector<StateEstimate> extract_state(const LMBDensity& lmb);

}  // namespace mslmb
