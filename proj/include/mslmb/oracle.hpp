#pragma once

// Exact single-sensor GLMB update by enumerating every association event.
// Exponential cost; intended as ground truth for small instances.

#include "mslmb/gaussian.hpp"
#include "mslmb/lbp.hpp"
#include "mslmb/lmb.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace mslmb::oracle {

inline constexpr double kMaxEvents = 1e7;

/// assignment[i] is 0 for a missed detection of track i (prior label order)
/// or j in 1..m when track i generated measurement j. Positive entries are distinct.
struct AssociationEvent {
  std::vector<int> assignment;
};

/// sum_k k! C(n,k) C(m,k)
double association_event_count(int n, int m);

class InstanceTooLarge : public std::length_error {
 public:
  InstanceTooLarge(double count, const std::string& what) : std::length_error(what), count_(count) {}
  double count() const { return count_; }

 private:
  double count_;
};

/// All events in a fixed recursive order. Throws InstanceTooLarge past kMaxEvents.
std::vector<AssociationEvent> enumerate_events(int n, int m);

struct HypothesisTrack {
  Label label;
  double existence;
  Gaussian spatial;
};

struct GLMBHypothesis {
  AssociationEvent event;
  double sigma;
  std::vector<HypothesisTrack> tracks;  ///< prior label order
};

class ZeroTotalWeight : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<GLMBHypothesis> exact_update(const LMBDensity& prior, std::span<const Vector> measurements,
                                         const SensorModel& sensor);

struct MixtureTrack {
  Label label;
  double existence;
  GaussianMixture spatial;
};

struct MomentMatched {
  std::vector<MixtureTrack> tracks;
  std::size_t dropped = 0;  ///< labels whose matched existence was zero
};

/// LMB with the same labelled PHD as the hypothesis mixture.
MomentMatched moment_match(std::span<const GLMBHypothesis> hypotheses);

}  // namespace mslmb::oracle
