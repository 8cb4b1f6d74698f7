#pragma once

#include "mslmb/gaussian.hpp"
#include "mslmb/lmb.hpp"
#include "mslmb/scenario.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mslmb {

struct OspaParams {
  double cutoff;
  double order;

  void validate() const;
};

inline constexpr OspaParams kEuclideanOspa{5.0, 2.0};
inline constexpr OspaParams kHellingerOspa{0.5, 2.0};

/// OSPA from the |X| x |Y| matrix of base distances. Both sets empty gives 0.
double ospa_from_distances(const Matrix& distances, const OspaParams& params);

template <typename T>
using BaseDistance = std::function<double(const T&, const T&)>;

template <typename T>
double ospa(std::span<const T> x, std::span<const T> y, const OspaParams& params, const BaseDistance<T>& base) {
  Matrix d(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = base(x[i], y[j]);
  }
  return ospa_from_distances(d, params);
}

/// Euclidean distance between the first two components (position).
double position_distance(const Vector& a, const Vector& b);

double euclidean_position_ospa(std::span<const Vector> estimates, std::span<const Vector> truths,
                               const OspaParams& params = kEuclideanOspa);

double hellinger_ospa(std::span<const Gaussian> estimates, std::span<const Gaussian> references,
                      const OspaParams& params = kHellingerOspa);

struct ReferenceEstimate {
  Label label;
  Gaussian gaussian;
};

/// Per-object Kalman filter with known association: each live object starts
/// from the density it was drawn from and absorbs its own detections, sensor
/// by sensor in index order, predicting between steps.
std::vector<std::vector<ReferenceEstimate>> optimal_reference(const Simulation& sim, const Scenario& scenario);

}  // namespace mslmb
