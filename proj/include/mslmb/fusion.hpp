#pragma once

#include "mslmb/gaussian.hpp"
#include "mslmb/lbp.hpp"
#include "mslmb/lmb.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mslmb {

enum class FusionStrategy { PU, GA, IC };

std::string to_string(FusionStrategy strategy);
FusionStrategy parse_strategy(const std::string& name);

/// Collapse used for per-sensor updates: division-safe best component for PU,
/// weak marginal otherwise.
CollapseMode default_collapse(FusionStrategy strategy);

struct FusionConfig {
  FusionStrategy strategy = FusionStrategy::PU;
  std::vector<double> sensor_weights;      ///< GA only; empty means 1/S each
  std::vector<std::size_t> sensor_order;   ///< IC only; empty means 0..S-1

  /// Resolved weights/order for `sensors` sensors; throws std::invalid_argument if malformed.
  std::vector<double> weights_for(std::size_t sensors) const;
  std::vector<std::size_t> order_for(std::size_t sensors) const;
};

/// Label sets of merged densities disagree.
class LabelMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FusionDiagnostics {
  std::size_t pu_fallbacks = 0;            ///< tracks merged by GA after a non-PD PU division
  std::size_t contradictory_existence = 0; ///< existence evidence 0 and 1 at once
  std::size_t lbp_updates = 0;
  std::size_t lbp_iterations = 0;
  std::size_t lbp_nonconverged = 0;

  FusionDiagnostics& operator+=(const FusionDiagnostics& other);
};

/// Parallel-update merge: p ∝ prior^(1-S) * prod_i p_i per label.
LMBDensity pu_merge(const LMBDensity& prior, std::span<const LMBDensity> updated, FusionDiagnostics* diag = nullptr);

/// Geometric-average merge: p ∝ prod_i p_i^w_i per label.
LMBDensity ga_merge(std::span<const LMBDensity> updated, std::span<const double> weights,
                    FusionDiagnostics* diag = nullptr);

/// Component-wise power of a mixture, (sum a_k N_k)^w ≈ sum (a_k N_k)^w, renormalized.
GaussianMixture gm_power_approx(const GaussianMixture& gm, double exponent);

struct SensorFrame {
  const SensorModel* sensor;
  std::span<const Vector> measurements;
};

/// Sequential LBP updates in `order`, each feeding the next as prior.
LMBDensity ic_update(const LMBDensity& prior, std::span<const SensorFrame> frames, std::span<const std::size_t> order,
                     const LbpOptions& options, CollapseMode mode = CollapseMode::WeakMarginal,
                     FusionDiagnostics* diag = nullptr);

/// One LBP update per sensor against the same prior, run concurrently on up to
/// `threads` OpenMP threads. Output index i always holds sensor i.
std::vector<SensorUpdate> parallel_sensor_updates(const LMBDensity& prior, std::span<const SensorFrame> frames,
                                                  const LbpOptions& options, CollapseMode mode, int threads);

/// Full multi-sensor measurement update for the configured strategy.
LMBDensity multi_sensor_update(const LMBDensity& prior, std::span<const SensorFrame> frames,
                               const FusionConfig& config, const LbpOptions& options, CollapseMode mode,
                               int threads, FusionDiagnostics* diag = nullptr);

}  // namespace mslmb
