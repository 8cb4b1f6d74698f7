#include "mslmb/lmb.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mslmb {

std::string to_string(const Label& label) {
  return "(" + std::to_string(label.birth_time) + "," + std::to_string(label.index) + ")";
}

LMBDensity::LMBDensity(std::vector<Track> tracks) {
  for (auto& t : tracks) insert(std::move(t));
}

void LMBDensity::insert(Track track) {
  if (!(track.existence >= 0.0 && track.existence <= 1.0)) {
    throw std::invalid_argument("LMBDensity: existence outside [0,1] for label " + to_string(track.label));
  }
  const Label label = track.label;
  if (!tracks_.emplace(label, std::move(track)).second) {
    throw std::invalid_argument("LMBDensity: duplicate label " + to_string(label));
  }
}

std::vector<Track> LMBDensity::tracks() const {
  std::vector<Track> out;
  out.reserve(tracks_.size());
  for (const auto& [label, track] : tracks_) out.push_back(track);
  return out;
}

std::vector<Label> LMBDensity::labels() const {
  std::vector<Label> out;
  out.reserve(tracks_.size());
  for (const auto& [label, track] : tracks_) out.push_back(label);
  return out;
}

std::vector<double> LMBDensity::existence() const {
  std::vector<double> out;
  out.reserve(tracks_.size());
  for (const auto& [label, track] : tracks_) out.push_back(track.existence);
  return out;
}

double LMBDensity::expected_cardinality() const {
  double sum = 0.0;
  for (const auto& [label, track] : tracks_) sum += track.existence;
  return sum;
}

bool LMBDensity::same_labels(const LMBDensity& other) const {
  return size() == other.size() &&
         std::equal(begin(), end(), other.begin(), [](const auto& a, const auto& b) { return a.first == b.first; });
}

BirthModel::BirthModel(std::vector<BirthLocation> locations) : locations_(std::move(locations)) {
  for (const auto& loc : locations_) {
    if (!(loc.existence > 0.0 && loc.existence < 1.0)) {
      throw std::invalid_argument("BirthModel: birth existence must lie in (0,1)");
    }
  }
}

LMBDensity predict(const LMBDensity& lmb, const MotionModel& motion, const BirthModel& birth, std::uint32_t step) {
  if (!(motion.survival >= 0.0 && motion.survival <= 1.0)) {
    throw std::invalid_argument("predict: survival probability outside [0,1]");
  }
  LMBDensity out;
  for (const auto& [label, track] : lmb) {
    out.insert({label, motion.survival * track.existence, predict_gaussian(track.spatial, motion.map)});
  }
  std::uint32_t index = 1;
  for (const auto& loc : birth.locations()) {
    const Label label{step, index++};
    if (out.contains(label)) throw std::invalid_argument("predict: birth label collides with " + to_string(label));
    out.insert({label, loc.existence, loc.spatial});
  }
  return out;
}

std::vector<double> cardinality_distribution(const std::vector<double>& existence) {
  // Convolve one Bernoulli at a time.
  std::vector<double> dist{1.0};
  dist.reserve(existence.size() + 1);
  for (const double r : existence) {
    dist.push_back(0.0);
    for (std::size_t n = dist.size() - 1; n > 0; --n) dist[n] = dist[n] * (1.0 - r) + dist[n - 1] * r;
    dist[0] *= (1.0 - r);
  }
  return dist;
}

std::vector<double> cardinality_distribution(const LMBDensity& lmb) {
  return cardinality_distribution(lmb.existence());
}

LMBDensity prune(const LMBDensity& lmb, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) throw std::invalid_argument("prune: threshold must lie in [0,1)");
  LMBDensity out;
  for (const auto& [label, track] : lmb) {
    if (track.existence >= threshold) out.insert(track);
  }
  return out;
}

std::vector<StateEstimate> extract_state(const LMBDensity& lmb) {
  if (lmb.empty()) return {};
  const auto dist = cardinality_distribution(lmb);
  // max_element returns the first maximum, i.e. the smallest count on ties.
  const auto n_map = static_cast<std::size_t>(std::distance(dist.begin(), std::max_element(dist.begin(), dist.end())));

  std::vector<const Track*> ranked;
  ranked.reserve(lmb.size());
  for (const auto& [label, track] : lmb) ranked.push_back(&track);
  // Map iteration is label-ordered, so a stable sort breaks ties by label.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Track* a, const Track* b) { return a->existence > b->existence; });

  std::vector<StateEstimate> out;
  out.reserve(n_map);
  for (std::size_t i = 0; i < n_map; ++i) {
    out.push_back({ranked[i]->label, ranked[i]->spatial.mean(), ranked[i]->spatial});
  }
  return out;
}

}  // namespace mslmb
