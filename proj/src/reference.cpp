#include "mslmb/reference.hpp"

#include <algorithm>
#include <cmath>

namespace mslmb::reference {

LikelihoodMatrix likelihood_matrix(const LMBDensity& prior, std::span<const Vector> measurements,
                                   const SensorModel& sensor) {
  sensor.validate();
  const auto tracks = prior.tracks();
  const auto n = static_cast<Eigen::Index>(tracks.size());
  const auto m = static_cast<Eigen::Index>(measurements.size());
  LikelihoodMatrix l{Matrix(n, m + 1)};
  for (Eigen::Index i = 0; i < n; ++i) {
    l.values(i, 0) = 1.0 - sensor.detection;
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto u = update_gaussian(tracks[i].spatial, sensor.map, measurements[j]);
      l.values(i, j + 1) = sensor.detection * std::exp(u.log_likelihood) / sensor.clutter_intensity();
    }
  }
  return l;
}

MessageState lbp_solve(const LikelihoodMatrix& likelihood, std::span<const double> existence,
                       const LbpOptions& options) {
  const Matrix& l = likelihood.values;
  const Eigen::Index n = likelihood.tracks();
  const Eigen::Index m = likelihood.measurements();
  if (static_cast<Eigen::Index>(existence.size()) != n) throw DimensionError("reference::lbp_solve: size mismatch");

  MessageState s{Matrix::Ones(n, m), Matrix::Ones(n, m), 0, true};
  if (n == 0 || m == 0) return s;
  s.converged = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        double others = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
          if (k != j) others += l(i, k + 1) * s.mu_mt(i, k);
        }
        const double r = update_existence(existence[i]);
        s.mu_tm(i, j) = r * l(i, j + 1) / ((1.0 - r) + r * (l(i, 0) + others));
      }
    }
    double delta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        double others = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k != i) others += s.mu_tm(k, j);
        }
        const double updated = 1.0 / (1.0 + others);
        delta = std::max(delta, std::abs(updated - s.mu_mt(i, j)));
        s.mu_mt(i, j) = updated;
      }
    }
    s.iterations = iter;
    if (delta < options.tolerance) {
      s.converged = true;
      break;
    }
  }
  return s;
}

SensorUpdate lbp_update(const LMBDensity& prior, std::span<const Vector> measurements, const SensorModel& sensor,
                        const LbpOptions& options, CollapseMode mode) {
  const auto l = likelihood_matrix(prior, measurements, sensor);
  const auto existence = prior.existence();
  const auto msgs = reference::lbp_solve(l, existence, options);
  return {lbp_posterior(prior, l, msgs, measurements, sensor, mode), msgs.iterations, msgs.converged};
}

std::vector<SensorUpdate> sensor_updates(const LMBDensity& prior, std::span<const SensorFrame> frames,
                                         const LbpOptions& options, CollapseMode mode) {
  std::vector<SensorUpdate> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(mslmb::lbp_update(prior, f.measurements, *f.sensor, options, mode));
  return out;
}

}  // namespace mslmb::reference
