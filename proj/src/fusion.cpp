#include "mslmb/fusion.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>

namespace mslmb {

namespace {

/// coefficient * log(x) with the convention 0 * log 0 = 0.
double xlog(double coefficient, double x) { return coefficient == 0.0 ? 0.0 : coefficient * std::log(x); }

/// r = P / (A + P) from log P and log A, saturating at the infinities.
/// Returns false when the evidence is contradictory (both sides equally infinite).
bool existence_from_logs(double log_present, double log_absent, double& r) {
  if (std::isnan(log_present) || std::isnan(log_absent)) return false;
  if (std::isinf(log_present) && std::isinf(log_absent) && (log_present > 0) == (log_absent > 0)) return false;
  if (log_present == std::numeric_limits<double>::infinity() || log_absent == -std::numeric_limits<double>::infinity()) {
    r = 1.0;
  } else if (log_present == -std::numeric_limits<double>::infinity() ||
             log_absent == std::numeric_limits<double>::infinity()) {
    r = 0.0;
  } else {
    r = 1.0 / (1.0 + std::exp(log_absent - log_present));
  }
  return true;
}

void require_same_labels(std::span<const LMBDensity> densities, const LMBDensity* prior) {
  if (densities.empty()) throw std::invalid_argument("merge: no sensor densities");
  const LMBDensity& ref = prior ? *prior : densities.front();
  for (const auto& d : densities) {
    if (!d.same_labels(ref)) throw LabelMismatch("merge: label sets differ between densities");
  }
}

Track ga_track(const Label& label, std::span<const LMBDensity> updated, std::span<const double> weights,
               FusionDiagnostics* diag) {
  std::vector<PowerTerm> terms;
  terms.reserve(updated.size());
  double log_present = 0.0;
  double log_absent = 0.0;
  for (std::size_t i = 0; i < updated.size(); ++i) {
    const Track& t = updated[i].at(label);
    terms.push_back({t.spatial, weights[i]});
    log_present += xlog(weights[i], t.existence);
    log_absent += xlog(weights[i], 1.0 - t.existence);
  }
  // Non-negative exponents summing to one: the combined precision is always PD.
  auto merged = power_product(terms);
  double r = 0.0;
  if (!existence_from_logs(merged.log_eta + log_present, log_absent, r)) {
    if (diag) ++diag->contradictory_existence;
    r = 0.0;
    for (std::size_t i = 0; i < updated.size(); ++i) r += weights[i] * updated[i].at(label).existence;
  }
  return {label, r, std::move(merged.gaussian)};
}

}  // namespace

std::string to_string(FusionStrategy strategy) {
  switch (strategy) {
    case FusionStrategy::PU: return "pu";
    case FusionStrategy::GA: return "ga";
    case FusionStrategy::IC: return "ic";
  }
  return "?";
}

FusionStrategy parse_strategy(const std::string& name) {
  if (name == "pu" || name == "PU") return FusionStrategy::PU;
  if (name == "ga" || name == "GA") return FusionStrategy::GA;
  if (name == "ic" || name == "IC") return FusionStrategy::IC;
  throw std::invalid_argument("unknown filter '" + name + "' (expected pu, ga or ic)");
}

CollapseMode default_collapse(FusionStrategy strategy) {
  return strategy == FusionStrategy::PU ? CollapseMode::BestComponent : CollapseMode::WeakMarginal;
}

std::vector<double> FusionConfig::weights_for(std::size_t sensors) const {
  if (sensor_weights.empty()) return std::vector<double>(sensors, 1.0 / static_cast<double>(sensors));
  if (sensor_weights.size() != sensors) throw std::invalid_argument("FusionConfig: one GA weight per sensor required");
  double total = 0.0;
  for (const double w : sensor_weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("FusionConfig: GA weight outside [0,1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("FusionConfig: GA weights must sum to 1");
  return sensor_weights;
}

std::vector<std::size_t> FusionConfig::order_for(std::size_t sensors) const {
  std::vector<std::size_t> order = sensor_order;
  if (order.empty()) {
    order.resize(sensors);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return order;
  }
  std::vector<bool> seen(sensors, false);
  if (order.size() != sensors) throw std::invalid_argument("FusionConfig: IC order must list every sensor once");
  for (const auto s : order) {
    if (s >= sensors || seen[s]) throw std::invalid_argument("FusionConfig: IC order is not a permutation");
    seen[s] = true;
  }
  return order;
}

FusionDiagnostics& FusionDiagnostics::operator+=(const FusionDiagnostics& other) {
  pu_fallbacks += other.pu_fallbacks;
  contradictory_existence += other.contradictory_existence;
  lbp_updates += other.lbp_updates;
  lbp_iterations += other.lbp_iterations;
  lbp_nonconverged += other.lbp_nonconverged;
  return *this;
}

LMBDensity pu_merge(const LMBDensity& prior, std::span<const LMBDensity> updated, FusionDiagnostics* diag) {
  require_same_labels(updated, &prior);
  const double s = static_cast<double>(updated.size());
  const std::vector<double> equal(updated.size(), 1.0 / s);

  LMBDensity out;
  std::vector<PowerTerm> terms;
  for (const auto& [label, prior_track] : prior) {
    terms.clear();
    terms.push_back({prior_track.spatial, 1.0 - s});
    double log_present = xlog(1.0 - s, prior_track.existence);
    double log_absent = xlog(1.0 - s, 1.0 - prior_track.existence);
    for (const auto& u : updated) {
      const Track& t = u.at(label);
      terms.push_back({t.spatial, 1.0});
      log_present += std::log(t.existence);
      log_absent += std::log1p(-t.existence);
    }

    std::optional<PowerProduct> merged;
    try {
      merged = power_product(terms);
    } catch (const NotPositiveDefinite&) {
      if (diag) ++diag->pu_fallbacks;
      out.insert(ga_track(label, updated, equal, diag));
      continue;
    }
    double r = 0.0;
    if (!existence_from_logs(merged->log_eta + log_present, log_absent, r)) {
      if (diag) ++diag->contradictory_existence;
      out.insert(ga_track(label, updated, equal, nullptr));
      continue;
    }
    out.insert({label, r, std::move(merged->gaussian)});
  }
  return out;
}

LMBDensity ga_merge(std::span<const LMBDensity> updated, std::span<const double> weights, FusionDiagnostics* diag) {
  require_same_labels(updated, nullptr);
  if (weights.size() != updated.size()) throw std::invalid_argument("ga_merge: one weight per sensor required");
  FusionConfig{FusionStrategy::GA, {weights.begin(), weights.end()}, {}}.weights_for(weights.size());
  LMBDensity out;
  for (const auto& [label, track] : updated.front()) out.insert(ga_track(label, updated, weights, diag));
  return out;
}

GaussianMixture gm_power_approx(const GaussianMixture& gm, double exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0)) throw std::invalid_argument("gm_power_approx: exponent must lie in (0,1]");
  if (exponent == 1.0) return gm;
  std::vector<WeightedGaussian> out;
  std::vector<double> log_weights;
  for (const auto& c : gm.components()) {
    const PowerTerm term{c.gaussian, exponent};
    auto powered = power_product(std::span<const PowerTerm>(&term, 1));
    log_weights.push_back(exponent * std::log(c.weight) + powered.log_eta);
    out.push_back({0.0, std::move(powered.gaussian)});
  }
  const double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k].weight = std::exp(log_weights[k] - max_lw);
  return GaussianMixture::normalized(std::move(out));
}

LMBDensity ic_update(const LMBDensity& prior, std::span<const SensorFrame> frames, std::span<const std::size_t> order,
                     const LbpOptions& options, CollapseMode mode, FusionDiagnostics* diag) {
  if (order.size() != frames.size()) throw std::invalid_argument("ic_update: order must cover every frame");
  LMBDensity current = prior;
  for (const auto idx : order) {
    if (idx >= frames.size()) throw std::invalid_argument("ic_update: order index out of range");
    auto u = lbp_update(current, frames[idx].measurements, *frames[idx].sensor, options, mode);
    if (diag) {
      ++diag->lbp_updates;
      diag->lbp_iterations += static_cast<std::size_t>(u.iterations);
      if (!u.converged) ++diag->lbp_nonconverged;
    }
    current = std::move(u.posterior);
  }
  return current;
}

std::vector<SensorUpdate> parallel_sensor_updates(const LMBDensity& prior, std::span<const SensorFrame> frames,
                                                  const LbpOptions& options, CollapseMode mode, int threads) {
  const auto count = static_cast<std::ptrdiff_t>(frames.size());
  std::vector<std::optional<SensorUpdate>> slots(frames.size());
  std::exception_ptr failure;
  const int team = static_cast<int>(std::max<std::ptrdiff_t>(1, std::min<std::ptrdiff_t>(threads, count)));
#pragma omp parallel for num_threads(team) schedule(static, 1) if (team > 1 && !omp_in_parallel())
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      slots[i] = lbp_update(prior, frames[i].measurements, *frames[i].sensor, options, mode);
    } catch (...) {
#pragma omp critical(mslmb_sensor_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<SensorUpdate> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

LMBDensity multi_sensor_update(const LMBDensity& prior, std::span<const SensorFrame> frames,
                               const FusionConfig& config, const LbpOptions& options, CollapseMode mode,
                               int threads, FusionDiagnostics* diag) {
  if (frames.empty()) return prior;
  if (config.strategy == FusionStrategy::IC) {
    const auto order = config.order_for(frames.size());
    return ic_update(prior, frames, order, options, mode, diag);
  }

  auto updates = parallel_sensor_updates(prior, frames, options, mode, threads);
  std::vector<LMBDensity> posteriors;
  posteriors.reserve(updates.size());
  for (auto& u : updates) {
    if (diag) {
      ++diag->lbp_updates;
      diag->lbp_iterations += static_cast<std::size_t>(u.iterations);
      if (!u.converged) ++diag->lbp_nonconverged;
    }
    posteriors.push_back(std::move(u.posterior));
  }
  if (config.strategy == FusionStrategy::PU) return pu_merge(prior, posteriors, diag);
  const auto weights = config.weights_for(frames.size());
  return ga_merge(posteriors, weights, diag);
}

}  // namespace mslmb
