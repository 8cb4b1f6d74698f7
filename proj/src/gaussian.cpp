#include "mslmb/gaussian.hpp"

#include <cmath>
#include <algorithm>

namespace mslmb {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require(bool condition, const char* what) {
  if (!condition) throw DimensionError(what);
}

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  const Matrix& l = llt.matrixLLT();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) sum += std::log(l(i, i));
  return 2.0 * sum;
}

Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(what);
  return llt;
}

}  // namespace

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double log_det_spd(const Matrix& m) { return log_det_from_llt(checked_llt(m, "log_det_spd: matrix not positive definite")); }

Gaussian::Gaussian(Vector mean, Matrix covariance) : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  require(covariance_.rows() == covariance_.cols(), "Gaussian: covariance must be square");
  require(covariance_.rows() == mean_.size(), "Gaussian: mean and covariance dimensions differ");
  require(mean_.size() > 0, "Gaussian: empty state");
  const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("Gaussian: covariance is not symmetric");
  }
  covariance_ = symmetrized(covariance_);
  checked_llt(covariance_, "Gaussian: covariance not positive definite");
}

double Gaussian::log_density(const Vector& x) const {
  require(x.size() == dim(), "log_density: dimension mismatch");
  const auto llt = covariance_.llt();
  const Vector d = x - mean_;
  return -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det_from_llt(llt) + d.dot(llt.solve(d)));
}

GaussianMixture::GaussianMixture(std::vector<WeightedGaussian> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("GaussianMixture: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || c.weight > 1.0) throw std::invalid_argument("GaussianMixture: weight outside (0,1]");
    require(c.gaussian.dim() == components_.front().gaussian.dim(), "GaussianMixture: component dimensions differ");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("GaussianMixture: weights do not sum to 1");
}

GaussianMixture GaussianMixture::normalized(std::vector<WeightedGaussian> components) {
  std::erase_if(components, [](const WeightedGaussian& c) { return !(c.weight > 0.0); });
  double total = 0.0;
  for (const auto& c : components) total += c.weight;
  for (auto& c : components) c.weight /= total;
  return GaussianMixture(std::move(components));
}

double GaussianMixture::density(const Vector& x) const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c.weight * std::exp(c.gaussian.log_density(x));
  return sum;
}

LinearGaussianMap::LinearGaussianMap(Matrix matrix, Matrix noise) : matrix_(std::move(matrix)), noise_(std::move(noise)) {
  require(noise_.rows() == noise_.cols(), "LinearGaussianMap: noise must be square");
  require(matrix_.rows() == noise_.rows(), "LinearGaussianMap: matrix rows must equal noise order");
  const double scale = std::max(1.0, noise_.cwiseAbs().maxCoeff());
  if ((noise_ - noise_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("LinearGaussianMap: noise is not symmetric");
  }
  noise_ = symmetrized(noise_);
  if (noise_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(noise_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw std::invalid_argument("LinearGaussianMap: noise is not positive semi-definite");
    }
  }
}

LinearGaussianMap constant_velocity_model(double dt, double intensity) {
  Eigen::Matrix2d a1;
  a1 << 1.0, dt, 0.0, 1.0;
  Eigen::Matrix2d q1;
  q1 << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
  q1 *= intensity;
  // Kronecker product with I2 for the [px, py, vx, vy] ordering.
  Matrix a = Matrix::Zero(4, 4);
  Matrix q = Matrix::Zero(4, 4);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < 2; ++k) {
        a(2 * r + k, 2 * c + k) = a1(r, c);
        q(2 * r + k, 2 * c + k) = q1(r, c);
      }
    }
  }
  return {a, q};
}

LinearGaussianMap position_sensor(double variance) {
  Matrix c = Matrix::Zero(2, 4);
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  return {c, variance * Matrix::Identity(2, 2)};
}

Gaussian predict_gaussian(const Gaussian& g, const LinearGaussianMap& motion) {
  require(motion.input_dim() == g.dim() && motion.output_dim() == g.dim(), "predict_gaussian: dimension mismatch");
  const Matrix& a = motion.matrix();
  return {a * g.mean(), symmetrized(a * g.covariance() * a.transpose() + motion.noise())};
}

InnovationModel::InnovationModel(const Gaussian& prior, const LinearGaussianMap& sensor_map) : prior_mean_(prior.mean()) {
  require(sensor_map.input_dim() == prior.dim(), "update: sensor/state dimension mismatch");
  const Matrix& c = sensor_map.matrix();
  const Matrix pct = prior.covariance() * c.transpose();
  const Matrix s = symmetrized(c * pct + sensor_map.noise());
  innovation_llt_ = checked_llt(s, "update: innovation covariance not positive definite");
  predicted_z_ = c * prior.mean();
  gain_ = innovation_llt_.solve(pct.transpose()).transpose();
  // Joseph form keeps the result positive definite under rounding.
  const Matrix ikc = Matrix::Identity(prior.dim(), prior.dim()) - gain_ * c;
  posterior_cov_ =
      symmetrized(ikc * prior.covariance() * ikc.transpose() + gain_ * sensor_map.noise() * gain_.transpose());
  log_norm_ = -0.5 * (static_cast<double>(s.rows()) * kLog2Pi + log_det_from_llt(innovation_llt_));
}

double InnovationModel::log_likelihood(const Vector& z) const {
  require(z.size() == predicted_z_.size(), "update: measurement dimension mismatch");
  const Vector nu = z - predicted_z_;
  return log_norm_ - 0.5 * nu.dot(innovation_llt_.solve(nu));
}

Vector InnovationModel::posterior_mean(const Vector& z) const {
  require(z.size() == predicted_z_.size(), "update: measurement dimension mismatch");
  return prior_mean_ + gain_ * (z - predicted_z_);
}

Gaussian InnovationModel::posterior(const Vector& z) const { return {posterior_mean(z), posterior_cov_}; }

GaussianUpdate update_gaussian(const Gaussian& g, const LinearGaussianMap& sensor_map, const Vector& z) {
  const InnovationModel model(g, sensor_map);
  return {model.posterior(z), model.log_likelihood(z)};
}

PowerProduct power_product(std::span<const PowerTerm> terms) {
  if (terms.empty()) throw std::invalid_argument("power_product: no terms");
  const Eigen::Index d = terms.front().gaussian.get().dim();

  std::vector<const PowerTerm*> active;
  for (const auto& t : terms) {
    require(t.gaussian.get().dim() == d, "power_product: dimension mismatch");
    if (t.exponent != 0.0) active.push_back(&t);
  }
  if (active.empty()) throw NotPositiveDefinite("power_product: all exponents are zero");
  if (active.size() == 1 && active.front()->exponent == 1.0) return {active.front()->gaussian.get(), 0.0};

  Matrix precision = Matrix::Zero(d, d);
  Vector shift = Vector::Zero(d);
  double log_eta = 0.0;
  double exponent_sum = 0.0;
  for (const PowerTerm* t : active) {
    const Gaussian& g = t->gaussian.get();
    const auto llt = checked_llt(g.covariance(), "power_product: term covariance not positive definite");
    const Matrix lambda = llt.solve(Matrix::Identity(d, d));
    const Vector h = lambda * g.mean();
    precision += t->exponent * lambda;
    shift += t->exponent * h;
    exponent_sum += t->exponent;
    log_eta -= 0.5 * t->exponent * (log_det_from_llt(llt) + g.mean().dot(h));
  }
  precision = symmetrized(precision);
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("power_product: combined precision not positive definite");
  const Vector mean = llt.solve(shift);
  const Matrix cov = llt.solve(Matrix::Identity(d, d));
  log_eta += 0.5 * static_cast<double>(d) * kLog2Pi * (1.0 - exponent_sum) - 0.5 * log_det_from_llt(llt) +
             0.5 * shift.dot(mean);
  return {Gaussian(mean, symmetrized(cov)), log_eta};
}

Gaussian weak_marginal(const GaussianMixture& gm) {
  const auto& comps = gm.components();
  if (comps.size() == 1) return comps.front().gaussian;
  const Eigen::Index d = gm.dim();
  Vector mean = Vector::Zero(d);
  for (const auto& c : comps) mean += c.weight * c.gaussian.mean();
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& c : comps) {
    const Vector diff = c.gaussian.mean() - mean;
    cov += c.weight * (c.gaussian.covariance() + diff * diff.transpose());
  }
  return {mean, symmetrized(cov)};
}

double hellinger_distance(const Gaussian& a, const Gaussian& b) {
  require(a.dim() == b.dim(), "hellinger_distance: dimension mismatch");
  const Matrix avg = symmetrized(0.5 * (a.covariance() + b.covariance()));
  const auto llt = checked_llt(avg, "hellinger_distance: averaged covariance not positive definite");
  const Vector d = a.mean() - b.mean();
  // log Bhattacharyya coefficient
  const double log_bc = 0.25 * log_det_spd(a.covariance()) + 0.25 * log_det_spd(b.covariance()) -
                        0.5 * log_det_from_llt(llt) - 0.125 * d.dot(llt.solve(d));
  const double h2 = -std::expm1(std::min(0.0, log_bc));
  return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

}  // namespace mslmb
