#pragma once

// Shared builders and brute-force oracles for the test suites.

#include "mslmb/gaussian.hpp"
#include "mslmb/lbp.hpp"
#include "mslmb/lmb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace mslmb::testing {

inline Gaussian scalar(double mean, double variance) {
  return Gaussian(Vector::Constant(1, mean), Matrix::Constant(1, 1, variance));
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

inline double normal_pdf(double x, double mean, double variance) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Composite Simpson rule on [a, b] with `intervals` (even) pieces.
inline double integrate(const std::function<double(double)>& f, double a, double b, int intervals = 20000) {
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

inline Matrix random_spd(Eigen::Index dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return scale * (a * a.transpose() / static_cast<double>(dim) + 0.5 * Matrix::Identity(dim, dim));
}

inline Gaussian random_gaussian(Eigen::Index dim, std::mt19937_64& rng, double spread = 3.0) {
  std::normal_distribution<double> normal(0.0, spread);
  Vector mean(dim);
  for (Eigen::Index i = 0; i < dim; ++i) mean(i) = normal(rng);
  return Gaussian(mean, random_spd(dim, rng));
}

/// Random single-sensor association instance on a 2-D position model.
struct AssociationInstance {
  LMBDensity prior;
  std::vector<Vector> z;
  SensorModel sensor;
};

inline AssociationInstance random_instance(int n, int m, std::mt19937_64& rng, double r_lo = 0.05, double r_hi = 0.95,
                                           double pd_lo = 0.3, double pd_hi = 1.0, double lambda_hi = 20.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  const double pd = pd_lo + (pd_hi - pd_lo) * unit(rng);
  const double lambda = lambda_hi * unit(rng);
  AssociationInstance inst{{}, {}, {position_sensor(1.0 + 3.0 * unit(rng)), pd, lambda, 400.0}};
  for (int i = 0; i < n; ++i) {
    Vector mu(4);
    mu << pos(rng), pos(rng), unit(rng), unit(rng);
    inst.prior.insert({{0, static_cast<std::uint32_t>(i + 1)}, r_lo + (r_hi - r_lo) * unit(rng),
                       Gaussian(mu, random_spd(4, rng, 4.0))});
  }
  for (int j = 0; j < m; ++j) inst.z.push_back(vec({pos(rng), pos(rng)}));
  return inst;
}

/// P(|X| = k) by summing the weight of every subset.
inline std::vector<double> brute_force_cardinality(const std::vector<double>& r) {
  const std::size_t n = r.size();
  std::vector<double> out(n + 1, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 1.0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        w *= r[i];
        ++count;
      } else {
        w *= 1.0 - r[i];
      }
    }
    out[static_cast<std::size_t>(count)] += w;
  }
  return out;
}

/// Minimum over every injective row->column map (rows <= cols).
inline double brute_force_assignment(const Matrix& cost) {
  std::vector<int> cols(static_cast<std::size_t>(cost.cols()));
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (Eigen::Index i = 0; i < cost.rows(); ++i) c += cost(i, cols[static_cast<std::size_t>(i)]);
    best = std::min(best, c);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace mslmb::testing
