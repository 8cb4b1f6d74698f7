#include "mslmb/metrics.hpp"

#include "mslmb/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mslmb {

void OspaParams::validate() const {
  if (!(cutoff > 0.0)) throw std::invalid_argument("OspaParams: cutoff must be positive");
  if (!(order >= 1.0)) throw std::invalid_argument("OspaParams: order must be >= 1");
}

double ospa_from_distances(const Matrix& distances, const OspaParams& params) {
  params.validate();
  // Work with rows as the smaller set.
  const Matrix d = distances.rows() <= distances.cols() ? distances : Matrix(distances.transpose());
  const Eigen::Index n = d.rows();
  const Eigen::Index m = d.cols();
  if (m == 0) return 0.0;
  if ((d.array() < 0.0).any() || !d.allFinite()) throw std::invalid_argument("ospa: invalid base distance");

  const double cp = std::pow(params.cutoff, params.order);
  Matrix cost = d.unaryExpr([&](double x) { return std::pow(std::min(x, params.cutoff), params.order); });
  const double matched = n > 0 ? solve_assignment(cost).cost : 0.0;
  const double total = (matched + cp * static_cast<double>(m - n)) / static_cast<double>(m);
  return std::min(std::pow(std::max(total, 0.0), 1.0 / params.order), params.cutoff);
}

double position_distance(const Vector& a, const Vector& b) {
  if (a.size() < 2 || b.size() < 2) throw DimensionError("position_distance: need at least two components");
  return (a.head<2>() - b.head<2>()).norm();
}

double euclidean_position_ospa(std::span<const Vector> estimates, std::span<const Vector> truths,
                               const OspaParams& params) {
  return ospa<Vector>(estimates, truths, params, position_distance);
}

double hellinger_ospa(std::span<const Gaussian> estimates, std::span<const Gaussian> references,
                      const OspaParams& params) {
  return ospa<Gaussian>(estimates, references, params, hellinger_distance);
}

std::vector<std::vector<ReferenceEstimate>> optimal_reference(const Simulation& sim, const Scenario& scenario) {
  const auto motion = scenario.motion();
  if (sim.sensors.size() != scenario.sensors.size()) {
    throw std::invalid_argument("optimal_reference: simulation and scenario disagree on sensor count");
  }
  std::vector<std::vector<ReferenceEstimate>> out(sim.truth.steps.size());
  std::map<Label, Gaussian> state;
  for (std::size_t k = 0; k < sim.truth.steps.size(); ++k) {
    std::map<Label, Gaussian> next;
    for (const auto& obj : sim.truth.steps[k]) {
      const auto it = state.find(obj.label);
      next.emplace(obj.label, it != state.end() ? predict_gaussian(it->second, motion.map)
                                                : sim.truth.initial_prior.at(obj.label));
    }
    for (std::size_t s = 0; s < sim.sensors.size(); ++s) {
      for (const auto& meas : sim.sensors[s].steps[k]) {
        if (!meas.origin) continue;
        auto it = next.find(*meas.origin);
        if (it == next.end()) continue;
        it->second = update_gaussian(it->second, scenario.sensors[s].map, meas.z).posterior;
      }
    }
    out[k].reserve(next.size());
    for (const auto& [label, g] : next) out[k].push_back({label, g});
    state = std::move(next);
  }
  return out;
}

}  // namespace mslmb
