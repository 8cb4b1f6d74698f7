#pragma once

// Straightforward serial versions of the parallel kernels. Slower, but each
// line maps onto the textbook expression; tests and benchmarks compare the
// optimized kernels against these.

#include "mslmb/fusion.hpp"
#include "mslmb/lbp.hpp"

#include <span>
#include <vector>

namespace mslmb::reference {

/// One update_gaussian call per (track, measurement) pair.
LikelihoodMatrix likelihood_matrix(const LMBDensity& prior, std::span<const Vector> measurements,
                                   const SensorModel& sensor);

/// Same schedule as mslmb::lbp_solve, with every exclusive sum re-added term by term.
MessageState lbp_solve(const LikelihoodMatrix& likelihood, std::span<const double> existence,
                       const LbpOptions& options = {});

SensorUpdate lbp_update(const LMBDensity& prior, std::span<const Vector> measurements, const SensorModel& sensor,
                        const LbpOptions& options, CollapseMode mode);

/// Per-sensor updates one after another on the calling thread.
std::vector<SensorUpdate> sensor_updates(const LMBDensity& prior, std::span<const SensorFrame> frames,
                                         const LbpOptions& options, CollapseMode mode);

}  // namespace mslmb::reference
