#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mslmb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be positive definite failed its Cholesky factorization.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multivariate normal N(mean, covariance).
///
/// The covariance is symmetrized on construction and must admit a Cholesky
/// factorization; anything else throws. Instances are immutable.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix covariance);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  Eigen::Index dim() const { return mean_.size(); }

  /// log N(x; mean, covariance)
  double log_density(const Vector& x) const;

 private:
  Vector mean_;
  Matrix covariance_;
};

struct WeightedGaussian {
  double weight;
  Gaussian gaussian;
};

/// Finite mixture with weights summing to one.
class GaussianMixture {
 public:
  /// Requires positive weights that already sum to 1 (within 1e-12).
  explicit GaussianMixture(std::vector<WeightedGaussian> components);

  /// Drops non-positive weights and rescales the rest to sum to 1.
  static GaussianMixture normalized(std::vector<WeightedGaussian> components);

  const std::vector<WeightedGaussian>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  Eigen::Index dim() const { return components_.front().gaussian.dim(); }
  double density(const Vector& x) const;

 private:
  std::vector<WeightedGaussian> components_;
};

/// x' = matrix * x + w, w ~ N(0, noise). Used for both motion (A, R) and
/// sensing (C, measurement noise). The noise may be positive semi-definite
/// so that deterministic dynamics can be expressed.
class LinearGaussianMap {
 public:
  LinearGaussianMap(Matrix matrix, Matrix noise);

  const Matrix& matrix() const { return matrix_; }
  const Matrix& noise() const { return noise_; }
  Eigen::Index input_dim() const { return matrix_.cols(); }
  Eigen::Index output_dim() const { return matrix_.rows(); }

 private:
  Matrix matrix_;
  Matrix noise_;
};

/// Constant-velocity model on [px, py, vx, vy] with white-noise acceleration
/// of intensity `intensity` over a step of `dt` seconds.
LinearGaussianMap constant_velocity_model(double dt, double intensity);

/// Position sensor z = [px, py] + v, v ~ N(0, variance * I).
LinearGaussianMap position_sensor(double variance);

Gaussian predict_gaussian(const Gaussian& g, const LinearGaussianMap& motion);

struct GaussianUpdate {
  Gaussian posterior;
  double log_likelihood;  ///< log of the predictive density of z
};

GaussianUpdate update_gaussian(const Gaussian& g, const LinearGaussianMap& sensor_map, const Vector& z);

/// Kalman update factored so that the innovation covariance, gain and
/// posterior covariance are computed once and reused across many
/// measurements of the same prior.
class InnovationModel {
 public:
  InnovationModel(const Gaussian& prior, const LinearGaussianMap& sensor_map);

  double log_likelihood(const Vector& z) const;
  Vector posterior_mean(const Vector& z) const;
  const Matrix& posterior_covariance() const { return posterior_cov_; }
  Gaussian posterior(const Vector& z) const;

 private:
  Vector predicted_z_;
  Matrix gain_;
  Matrix posterior_cov_;
  Eigen::LLT<Matrix> innovation_llt_;
  Vector prior_mean_;
  double log_norm_;
};

struct PowerTerm {
  std::reference_wrapper<const Gaussian> gaussian;
  double exponent;
};

struct PowerProduct {
  Gaussian gaussian;
  double log_eta;  ///< log of the integral of the unnormalized product
};

/// Normalized product prod_i g_i(x)^exponent_i, computed in information form.
/// Negative exponents divide densities. Throws NotPositiveDefinite when the
/// combined precision is not positive definite.
PowerProduct power_product(std::span<const PowerTerm> terms);

/// Moment-matched single Gaussian of a mixture.
Gaussian weak_marginal(const GaussianMixture& gm);

double hellinger_distance(const Gaussian& a, const Gaussian& b);

/// log det of a symmetric positive-definite matrix; throws NotPositiveDefinite.
double log_det_spd(const Matrix& m);

Matrix symmetrized(const Matrix& m);

}  // namespace mslmb
