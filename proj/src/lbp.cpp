#include "mslmb/lbp.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <vector>

namespace mslmb {

namespace {

// Below this many matrix entries the OpenMP fork/join costs more than the sweep.
constexpr Eigen::Index kParallelEntries = 4096;

std::vector<InnovationModel> innovations_for(const std::vector<Track>& tracks, const SensorModel& sensor) {
  std::vector<InnovationModel> out;
  out.reserve(tracks.size());
  for (const auto& t : tracks) out.emplace_back(t.spatial, sensor.map);
  return out;
}

LikelihoodMatrix likelihoods_from(std::span<const InnovationModel> innovations, std::span<const Vector> z,
                                  const SensorModel& sensor) {
  const auto n = static_cast<Eigen::Index>(innovations.size());
  const auto m = static_cast<Eigen::Index>(z.size());
  for (const auto& zj : z) {
    if (zj.size() != sensor.map.output_dim()) throw DimensionError("likelihood: measurement dimension mismatch");
  }
  LikelihoodMatrix l{Matrix(n, m + 1)};
  const double log_scale = std::log(sensor.detection) - std::log(sensor.clutter_intensity());
#pragma omp parallel for if (n * m >= kParallelEntries)
  for (Eigen::Index i = 0; i < n; ++i) {
    l.values(i, 0) = 1.0 - sensor.detection;
    for (Eigen::Index j = 0; j < m; ++j) {
      l.values(i, j + 1) = sensor.detection > 0.0 ? std::exp(log_scale + innovations[i].log_likelihood(z[j])) : 0.0;
    }
  }
  return l;
}

struct Belief {
  double existence;
  Gaussian spatial;
};

Belief object_belief(const Track& prior, const InnovationModel& innovation, const LikelihoodMatrix& l,
                     const MessageState& msgs, Eigen::Index i, std::span<const Vector> z, CollapseMode mode) {
  const Eigen::Index m = l.measurements();
  double mass = l.values(i, 0);
  for (Eigen::Index k = 0; k < m; ++k) mass += l.values(i, k + 1) * msgs.mu_mt(i, k);
  if (!std::isfinite(mass)) throw DegenerateLikelihood("lbp_posterior: non-finite belief mass");

  const double r = update_existence(prior.existence);
  double existence = prior.existence;
  if (mass != 1.0) {
    const double den = (1.0 - r) + r * mass;
    if (!(den > 0.0)) throw DegenerateLikelihood("lbp_posterior: belief normalizer vanished");
    existence = std::clamp(r * mass / den, 0.0, 1.0);
  }
  if (!(mass > 0.0) || l.values(i, 0) == mass) return {existence, prior.spatial};

  if (mode == CollapseMode::BestComponent) {
    Eigen::Index best = -1;
    double best_weight = l.values(i, 0);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double w = l.values(i, k + 1) * msgs.mu_mt(i, k);
      if (w > best_weight) {
        best_weight = w;
        best = k;
      }
    }
    return {existence, best < 0 ? prior.spatial : innovation.posterior(z[best])};
  }

  // Weak marginal of the (m+1)-component mixture. Detection components share one covariance.
  const Eigen::Index d = prior.spatial.dim();
  const double w_miss = l.values(i, 0) / mass;
  Vector mean = w_miss * prior.spatial.mean();
  std::vector<std::pair<double, Vector>> detected;
  double w_detected = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double w = l.values(i, k + 1) * msgs.mu_mt(i, k) / mass;
    if (w > 0.0) {
      detected.emplace_back(w, innovation.posterior_mean(z[k]));
      mean += w * detected.back().second;
      w_detected += w;
    }
  }
  Matrix cov = Matrix::Zero(d, d);
  if (w_miss > 0.0) {
    const Vector diff = prior.spatial.mean() - mean;
    cov += w_miss * (prior.spatial.covariance() + diff * diff.transpose());
  }
  cov += w_detected * innovation.posterior_covariance();
  for (const auto& [w, mu] : detected) {
    const Vector diff = mu - mean;
    cov.noalias() += w * diff * diff.transpose();
  }
  return {existence, Gaussian(mean, symmetrized(cov))};
}

LMBDensity posterior_from(const std::vector<Track>& tracks, std::span<const InnovationModel> innovations,
                          const LikelihoodMatrix& l, const MessageState& msgs, std::span<const Vector> z,
                          CollapseMode mode) {
  const auto n = static_cast<Eigen::Index>(tracks.size());
  std::vector<std::optional<Belief>> beliefs(tracks.size());
  std::exception_ptr failure;
#pragma omp parallel for if (n * l.measurements() >= kParallelEntries)
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      beliefs[i] = object_belief(tracks[i], innovations[i], l, msgs, i, z, mode);
    } catch (...) {
#pragma omp critical(mslmb_lbp_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  LMBDensity out;
  for (Eigen::Index i = 0; i < n; ++i) out.insert({tracks[i].label, beliefs[i]->existence, beliefs[i]->spatial});
  return out;
}

void check_inputs(const LikelihoodMatrix& l, std::span<const double> existence, const LbpOptions& options) {
  if (static_cast<Eigen::Index>(existence.size()) != l.tracks()) {
    throw DimensionError("lbp_solve: existence vector does not match likelihood rows");
  }
  if (l.values.cols() < 1) throw DimensionError("lbp_solve: likelihood matrix lacks the miss column");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("lbp_solve: tolerance must be positive");
  if (options.max_iterations < 1) throw std::invalid_argument("lbp_solve: max_iterations must be >= 1");
}

}  // namespace

void SensorModel::validate() const {
  if (!(detection >= 0.0 && detection <= 1.0)) throw std::invalid_argument("SensorModel: detection outside [0,1]");
  if (!(clutter_rate >= 0.0)) throw std::invalid_argument("SensorModel: negative clutter rate");
  if (!(region_volume > 0.0)) throw std::invalid_argument("SensorModel: region volume must be positive");
}

double SensorModel::clutter_intensity() const {
  return std::max(clutter_rate / region_volume, kMinClutterIntensity);
}

LikelihoodMatrix build_likelihood_matrix(const LMBDensity& prior, std::span<const Vector> measurements,
                                         const SensorModel& sensor) {
  sensor.validate();
  const auto tracks = prior.tracks();
  const auto innovations = innovations_for(tracks, sensor);
  return likelihoods_from(innovations, measurements, sensor);
}

MessageState lbp_solve(const LikelihoodMatrix& likelihood, std::span<const double> existence,
                       const LbpOptions& options) {
  check_inputs(likelihood, existence, options);
  const Matrix& l = likelihood.values;
  const Eigen::Index n = likelihood.tracks();
  const Eigen::Index m = likelihood.measurements();

  MessageState s{Matrix::Ones(n, m), Matrix::Ones(n, m), 0, true};
  if (n == 0 || m == 0) return s;
  s.converged = false;

  const bool parallel = n * m >= kParallelEntries;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    double delta = 0.0;
#pragma omp parallel if (parallel)
    {
      // suffix[k] = sum of terms k..end; exclusive sums avoid subtractive cancellation.
      std::vector<double> suffix(static_cast<std::size_t>(std::max(n, m)) + 1);

#pragma omp for
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = update_existence(existence[i]);
        const double base = (1.0 - r) + r * l(i, 0);
        suffix[m] = 0.0;
        for (Eigen::Index k = m - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + l(i, k + 1) * s.mu_mt(i, k);
        double prefix = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
          s.mu_tm(i, j) = r * l(i, j + 1) / (base + r * (prefix + suffix[j + 1]));
          prefix += l(i, j + 1) * s.mu_mt(i, j);
        }
      }

#pragma omp for reduction(max : delta)
      for (Eigen::Index j = 0; j < m; ++j) {
        suffix[n] = 0.0;
        for (Eigen::Index k = n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + s.mu_tm(k, j);
        double prefix = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double updated = 1.0 / (1.0 + prefix + suffix[i + 1]);
          delta = std::max(delta, std::abs(updated - s.mu_mt(i, j)));
          s.mu_mt(i, j) = updated;
          prefix += s.mu_tm(i, j);
        }
      }
    }

    if (!s.mu_tm.allFinite() || !s.mu_mt.allFinite()) {
      throw DegenerateLikelihood("lbp_solve: non-finite message");
    }
    s.iterations = iter;
    if (delta < options.tolerance) {
      s.converged = true;
      break;
    }
  }
  return s;
}

LMBDensity lbp_posterior(const LMBDensity& prior, const LikelihoodMatrix& likelihood, const MessageState& messages,
                         std::span<const Vector> measurements, const SensorModel& sensor, CollapseMode mode) {
  if (likelihood.tracks() != static_cast<Eigen::Index>(prior.size()) ||
      likelihood.measurements() != static_cast<Eigen::Index>(measurements.size())) {
    throw DimensionError("lbp_posterior: likelihood matrix does not match prior/measurements");
  }
  const auto tracks = prior.tracks();
  const auto innovations = innovations_for(tracks, sensor);
  return posterior_from(tracks, innovations, likelihood, messages, measurements, mode);
}

SensorUpdate lbp_update(const LMBDensity& prior, std::span<const Vector> measurements, const SensorModel& sensor,
                        const LbpOptions& options, CollapseMode mode) {
  sensor.validate();
  const auto tracks = prior.tracks();
  const auto innovations = innovations_for(tracks, sensor);
  const auto l = likelihoods_from(innovations, measurements, sensor);
  std::vector<double> existence;
  existence.reserve(tracks.size());
  for (const auto& t : tracks) existence.push_back(t.existence);
  const auto msgs = lbp_solve(l, existence, options);
  return {posterior_from(tracks, innovations, l, msgs, measurements, mode), msgs.iterations, msgs.converged};
}

}  // namespace mslmb
