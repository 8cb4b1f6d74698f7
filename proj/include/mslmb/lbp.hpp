#pragma once

#include "mslmb/gaussian.hpp"
#include "mslmb/lmb.hpp"

#include <span>
#include <stdexcept>

namespace mslmb {

/// Clutter intensity used when a sensor is configured with no clutter. Ratios
/// against it are finite, and clutter explanations carry negligible weight.
inline constexpr double kMinClutterIntensity = 1e-200;

/// Existence entering an update is capped here. At exactly 1 with P_D = 1 the
/// messages divide by zero; sequential updates reach 1 through rounding.
inline constexpr double kMaxUpdateExistence = 1.0 - 1e-12;
inline double update_existence(double r) { return r < kMaxUpdateExistence ? r : kMaxUpdateExistence; }

struct SensorModel {
  LinearGaussianMap map;
  double detection;      ///< P_D in [0,1]
  double clutter_rate;   ///< expected clutter returns per scan, >= 0
  double region_volume;  ///< area of the uniform clutter support, > 0

  void validate() const;
  /// kappa(z) = clutter_rate / region_volume, floored at kMinClutterIntensity.
  double clutter_intensity() const;
};

/// n x (m+1) likelihood ratios; column 0 is the missed detection.
struct LikelihoodMatrix {
  Matrix values;

  Eigen::Index tracks() const { return values.rows(); }
  Eigen::Index measurements() const { return values.cols() - 1; }
};

/// Object-to-measurement and measurement-to-object messages, both n x m and
/// normalized so that the a = 0 entry is 1.
struct MessageState {
  Matrix mu_tm;
  Matrix mu_mt;
  int iterations = 0;
  bool converged = false;
};

struct LbpOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
};

enum class CollapseMode { BestComponent, WeakMarginal };

/// Messages or beliefs became NaN/Inf, or a belief normalizer vanished.
class DegenerateLikelihood : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LikelihoodMatrix build_likelihood_matrix(const LMBDensity& prior, std::span<const Vector> measurements,
                                         const SensorModel& sensor);

/// Jacobi fixed-point iteration: every sweep updates all mu_tm from the
/// current mu_mt, then all mu_mt from the new mu_tm. Starts from all-ones
/// messages and stops once max |delta mu_mt| < tolerance.
MessageState lbp_solve(const LikelihoodMatrix& likelihood, std::span<const double> existence,
                       const LbpOptions& options = {});

/// Beliefs of the object clusters, collapsed to one Gaussian per track.
LMBDensity lbp_posterior(const LMBDensity& prior, const LikelihoodMatrix& likelihood, const MessageState& messages,
                         std::span<const Vector> measurements, const SensorModel& sensor, CollapseMode mode);

struct SensorUpdate {
  LMBDensity posterior;
  int iterations = 0;
  bool converged = true;
};

/// build_likelihood_matrix + lbp_solve + lbp_posterior.
SensorUpdate lbp_update(const LMBDensity& prior, std::span<const Vector> measurements, const SensorModel& sensor,
                        const LbpOptions& options, CollapseMode mode);

}  // namespace mslmb
