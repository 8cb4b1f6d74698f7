#include "mslmb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mslmb::oracle {

namespace {

void enumerate(int track, int n, int m, std::vector<int>& current, std::vector<bool>& used,
               std::vector<AssociationEvent>& out) {
  if (track == n) {
    out.push_back({current});
    return;
  }
  current[track] = 0;
  enumerate(track + 1, n, m, current, used, out);
  for (int j = 1; j <= m; ++j) {
    if (used[j]) continue;
    used[j] = true;
    current[track] = j;
    enumerate(track + 1, n, m, current, used, out);
    used[j] = false;
  }
  current[track] = 0;
}

}  // namespace

double association_event_count(int n, int m) {
  if (n < 0 || m < 0) throw std::invalid_argument("association_event_count: negative size");
  // term_k = k! C(n,k) C(m,k); term_{k+1} / term_k = (n-k)(m-k)/(k+1)
  double term = 1.0;
  double total = 1.0;
  for (int k = 0; k < std::min(n, m); ++k) {
    term *= static_cast<double>(n - k) * static_cast<double>(m - k) / static_cast<double>(k + 1);
    total += term;
  }
  return total;
}

std::vector<AssociationEvent> enumerate_events(int n, int m) {
  const double count = association_event_count(n, m);
  if (count > kMaxEvents) {
    throw InstanceTooLarge(count, "enumerate_events: " + std::to_string(count) + " association events exceeds limit");
  }
  std::vector<AssociationEvent> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> current(static_cast<std::size_t>(n), 0);
  std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
  enumerate(0, n, m, current, used, out);
  return out;
}

std::vector<GLMBHypothesis> exact_update(const LMBDensity& prior, std::span<const Vector> measurements,
                                         const SensorModel& sensor) {
  sensor.validate();
  const auto tracks = prior.tracks();
  const int n = static_cast<int>(tracks.size());
  const int m = static_cast<int>(measurements.size());
  const auto events = enumerate_events(n, m);
  const double pd = sensor.detection;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double kappa = sensor.clutter_rate / sensor.region_volume;
  const double log_kappa = kappa > 0.0 ? std::log(kappa) : kNegInf;

  std::vector<std::vector<Gaussian>> updated(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> log_detect(static_cast<std::size_t>(n));
  std::vector<double> log_miss(static_cast<std::size_t>(n));
  std::vector<double> miss_existence(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = tracks[i].existence;
    const InnovationModel innovation(tracks[i].spatial, sensor.map);
    for (int j = 0; j < m; ++j) {
      updated[i].push_back(innovation.posterior(measurements[j]));
      log_detect[i].push_back(pd > 0.0 && r > 0.0 ? std::log(r) + std::log(pd) + innovation.log_likelihood(measurements[j])
                                                  : kNegInf);
    }
    const double miss = 1.0 - r * pd;
    log_miss[i] = miss > 0.0 ? std::log(miss) : kNegInf;
    miss_existence[i] = miss > 0.0 ? r * (1.0 - pd) / miss : 0.0;
  }

  // Unnormalized weight of each event times the event-independent constant
  // prod_l (1 - r_l P_D) prod_j kappa; clutter enters via unassigned measurements.
  std::vector<double> log_weight(events.size());
  const auto num_events = static_cast<std::ptrdiff_t>(events.size());
#pragma omp parallel for
  for (std::ptrdiff_t e = 0; e < num_events; ++e) {
    const auto& a = events[e].assignment;
    double lw = 0.0;
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
      if (a[i] == 0) {
        lw += log_miss[i];
      } else {
        lw += log_detect[i][a[i] - 1];
        ++assigned;
      }
    }
    if (m - assigned > 0) lw += static_cast<double>(m - assigned) * log_kappa;
    log_weight[e] = lw;
  }

  const double max_lw = *std::max_element(log_weight.begin(), log_weight.end());
  if (!std::isfinite(max_lw)) throw ZeroTotalWeight("exact_update: every association event has zero weight");
  double total = 0.0;
  for (const double lw : log_weight) total += std::exp(lw - max_lw);

  std::vector<GLMBHypothesis> out;
  out.reserve(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    GLMBHypothesis h{events[e], std::exp(log_weight[e] - max_lw) / total, {}};
    h.tracks.reserve(tracks.size());
    for (int i = 0; i < n; ++i) {
      const int j = events[e].assignment[i];
      if (j == 0) {
        h.tracks.push_back({tracks[i].label, miss_existence[i], tracks[i].spatial});
      } else {
        h.tracks.push_back({tracks[i].label, 1.0, updated[i][j - 1]});
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

MomentMatched moment_match(std::span<const GLMBHypothesis> hypotheses) {
  MomentMatched out;
  if (hypotheses.empty()) return out;
  const std::size_t n = hypotheses.front().tracks.size();
  for (std::size_t i = 0; i < n; ++i) {
    // Under every event sharing assignment[i] the track carries the same spatial density.
    std::map<int, std::pair<double, const Gaussian*>> by_assignment;
    double existence = 0.0;
    for (const auto& h : hypotheses) {
      const double w = h.sigma * h.tracks[i].existence;
      existence += w;
      auto [it, inserted] = by_assignment.try_emplace(h.event.assignment[i], 0.0, &h.tracks[i].spatial);
      it->second.first += w;
    }
    if (!(existence > 0.0)) {
      ++out.dropped;
      continue;
    }
    std::vector<WeightedGaussian> components;
    for (const auto& [assignment, entry] : by_assignment) {
      if (entry.first > 0.0) components.push_back({entry.first, *entry.second});
    }
    out.tracks.push_back({hypotheses.front().tracks[i].label, std::min(existence, 1.0),
                          GaussianMixture::normalized(std::move(components))});
  }
  return out;
}

}  // namespace mslmb::oracle
