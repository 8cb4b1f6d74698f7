#include "mslmb/fusion.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace mslmb;
using mslmb::testing::integrate;
using mslmb::testing::random_instance;
using mslmb::testing::scalar;

namespace {

LMBDensity single(double r, const Gaussian& g, Label label = {0, 1}) {
  LMBDensity lmb;
  lmb.insert({label, r, g});
  return lmb;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void expect_same(const LMBDensity& a, const LMBDensity& b, double tol) {
  ASSERT_TRUE(a.same_labels(b));
  for (const auto& [label, t] : a) {
    const auto& u = b.at(label);
    EXPECT_NEAR(t.existence, u.existence, tol);
    EXPECT_LE(max_abs(t.spatial.mean() - u.spatial.mean()), tol);
    EXPECT_LE(max_abs(t.spatial.covariance() - u.spatial.covariance()), tol);
  }
}

/// Random densities over the same labels, as if updated by different sensors.
std::vector<LMBDensity> random_updates(std::size_t sensors, int tracks, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  std::vector<LMBDensity> out(sensors);
  for (auto& d : out) {
    for (int i = 0; i < tracks; ++i) {
      d.insert({{1, static_cast<std::uint32_t>(i + 1)}, unit(rng), mslmb::testing::random_gaussian(4, rng)});
    }
  }
  return out;
}

/// A prior wider than every update so the PU division stays valid.
LMBDensity wide_prior(const std::vector<LMBDensity>& updates, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  LMBDensity prior;
  for (const auto& [label, t] : updates.front()) {
    prior.insert({label, unit(rng), Gaussian(t.spatial.mean(), Matrix::Identity(4, 4) * 1e3)});
  }
  return prior;
}

}  // namespace

TEST(FusionConfig, ValidatesWeightsAndOrder) {
  FusionConfig c;
  EXPECT_EQ(c.weights_for(4), std::vector<double>(4, 0.25));
  EXPECT_EQ(c.order_for(3), (std::vector<std::size_t>{0, 1, 2}));
  c.sensor_weights = {0.3, 0.6};
  EXPECT_THROW(c.weights_for(2), std::invalid_argument);
  c.sensor_weights = {1.2, -0.2};
  EXPECT_THROW(c.weights_for(2), std::invalid_argument);
  c.sensor_weights = {0.5, 0.5};
  EXPECT_THROW(c.weights_for(3), std::invalid_argument);
  c.sensor_order = {1, 1};
  EXPECT_THROW(c.order_for(2), std::invalid_argument);
  c.sensor_order = {1, 0};
  EXPECT_EQ(c.order_for(2), (std::vector<std::size_t>{1, 0}));
}

TEST(FusionConfig, ParsesStrategyNames) {
  EXPECT_EQ(parse_strategy("pu"), FusionStrategy::PU);
  EXPECT_EQ(parse_strategy("GA"), FusionStrategy::GA);
  EXPECT_EQ(parse_strategy("ic"), FusionStrategy::IC);
  EXPECT_THROW(parse_strategy("mgs"), std::invalid_argument);
  EXPECT_EQ(default_collapse(FusionStrategy::PU), CollapseMode::BestComponent);
  EXPECT_EQ(default_collapse(FusionStrategy::GA), CollapseMode::WeakMarginal);
}

TEST(PuMerge, ExistenceExample) {
  const auto g = scalar(0, 1);
  const std::vector<LMBDensity> updated{single(0.8, g), single(0.8, g)};
  const auto out = pu_merge(single(0.5, g), updated);
  EXPECT_NEAR(out.at({0, 1}).existence, 1.28 / 1.36, 1e-14);
}

TEST(PuMerge, SpatialExample) {
  const std::vector<LMBDensity> updated{single(0.6, scalar(0, 0.5)), single(0.6, scalar(2, 0.5))};
  const auto out = pu_merge(single(0.5, scalar(0, 1)), updated);
  EXPECT_NEAR(out.at({0, 1}).spatial.mean()(0), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(out.at({0, 1}).spatial.covariance()(0, 0), 1.0 / 3.0, 1e-14);
}

TEST(PuMerge, SingleSensorReduction) {
  std::mt19937_64 rng(1);
  const auto updates = random_updates(1, 10, rng);
  const auto out = pu_merge(wide_prior(updates, rng), updates);
  expect_same(out, updates[0], 1e-12);
}

TEST(PuMerge, SaturatesOnCertainEvidence) {
  const auto g = scalar(0, 1);
  const std::vector<LMBDensity> sure{single(1.0, g), single(0.5, g)};
  EXPECT_EQ(pu_merge(single(0.5, g), sure).at({0, 1}).existence, 1.0);
  const std::vector<LMBDensity> gone{single(0.0, g), single(0.5, g)};
  EXPECT_EQ(pu_merge(single(0.5, g), gone).at({0, 1}).existence, 0.0);
}

TEST(PuMerge, ContradictoryEvidenceFallsBackToGeometricAverage) {
  const auto g = scalar(0, 1);
  const std::vector<LMBDensity> updated{single(1.0, g), single(0.0, g)};
  FusionDiagnostics diag;
  const auto out = pu_merge(single(0.5, g), updated, &diag);
  EXPECT_EQ(diag.contradictory_existence, 1u);
  EXPECT_DOUBLE_EQ(out.at({0, 1}).existence, 0.5);
}

TEST(PuMerge, NonPositiveDivisionFallsBackToGeometricAverage) {
  const std::vector<LMBDensity> updated{single(0.6, scalar(0, 1)), single(0.7, scalar(0.5, 1))};
  FusionDiagnostics diag;
  const auto out = pu_merge(single(0.5, scalar(0, 0.1)), updated, &diag);
  EXPECT_EQ(diag.pu_fallbacks, 1u);
  const std::vector<double> w{0.5, 0.5};
  expect_same(out, ga_merge(updated, w), 0.0);
}

TEST(PuMerge, LabelMismatchThrows) {
  const auto g = scalar(0, 1);
  const std::vector<LMBDensity> updated{single(0.5, g), single(0.5, g, {0, 2})};
  EXPECT_THROW(pu_merge(single(0.5, g), updated), LabelMismatch);
  const std::vector<double> w{0.5, 0.5};
  EXPECT_THROW(ga_merge(updated, w), LabelMismatch);
}

TEST(GaMerge, ExistenceExample) {
  const auto g = scalar(0, 1);
  const std::vector<LMBDensity> updated{single(0.9, g), single(0.5, g)};
  const std::vector<double> w{0.5, 0.5};
  const auto out = ga_merge(updated, w);
  EXPECT_NEAR(out.at({0, 1}).existence, 0.75, 1e-14);
  EXPECT_NEAR(out.at({0, 1}).existence, std::sqrt(0.45) / (std::sqrt(0.05) + std::sqrt(0.45)), 1e-14);
}

TEST(GaMerge, SpatialExample) {
  const std::vector<LMBDensity> updated{single(0.5, scalar(0, 1)), single(0.5, scalar(2, 1))};
  const std::vector<double> w{0.5, 0.5};
  const auto out = ga_merge(updated, w);
  EXPECT_NEAR(out.at({0, 1}).spatial.mean()(0), 1.0, 1e-14);
  EXPECT_NEAR(out.at({0, 1}).spatial.covariance()(0, 0), 1.0, 1e-14);
  // eta = e^{-1/2}: r = eta * 0.5 / (0.5 + eta * 0.5)
  const double eta = std::exp(-0.5);
  EXPECT_NEAR(out.at({0, 1}).existence, eta / (1.0 + eta), 1e-14);
}

TEST(GaMerge, IdenticalInputsAreFixed) {
  std::mt19937_64 rng(2);
  const auto one = random_updates(1, 6, rng)[0];
  const std::vector<LMBDensity> updated{one, one, one};
  const std::vector<double> w{0.2, 0.5, 0.3};
  expect_same(ga_merge(updated, w), one, 1e-12);
}

TEST(GaMerge, UnitWeightReduction) {
  std::mt19937_64 rng(3);
  const auto updates = random_updates(1, 10, rng);
  const std::vector<double> w{1.0};
  expect_same(ga_merge(updates, w), updates[0], 1e-12);
}

TEST(GaMerge, RejectsBadWeights) {
  std::mt19937_64 rng(4);
  const auto updates = random_updates(2, 2, rng);
  const std::vector<double> w{0.4, 0.4};
  EXPECT_THROW(ga_merge(updates, w), std::invalid_argument);
}

TEST(Merges, InvariantUnderSensorPermutation) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto updates = random_updates(4, 5, rng);
    const auto prior = wide_prior(updates, rng);
    std::vector<double> w{0.1, 0.2, 0.3, 0.4};
    const auto pu = pu_merge(prior, updates);
    const auto ga = ga_merge(updates, w);
    std::vector<std::size_t> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<LMBDensity> permuted;
    std::vector<double> pw;
    for (const auto p : perm) {
      permuted.push_back(updates[p]);
      pw.push_back(w[p]);
    }
    expect_same(pu_merge(prior, permuted), pu, 1e-12);
    expect_same(ga_merge(permuted, pw), ga, 1e-12);
  }
}

TEST(Merges, ExistenceStaysInUnitInterval) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto updates = random_updates(3, 4, rng);
    const auto prior = wide_prior(updates, rng);
    const std::vector<double> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (const auto& d : {pu_merge(prior, updates), ga_merge(updates, w)}) {
      for (const auto& [label, t] : d) {
        EXPECT_GE(t.existence, 0.0);
        EXPECT_LE(t.existence, 1.0);
      }
    }
  }
}

TEST(Merges, GaCovariancePessimismAndPuInformationGain) {
  std::mt19937_64 rng(7);
  for (const std::size_t s : {2u, 4u, 8u}) {
    const Gaussian prior_g(mslmb::testing::vec({1.0, -2.0, 0.5, 0.3}), mslmb::testing::random_spd(4, rng, 20.0));
    const auto prior = single(0.5, prior_g);
    const SensorModel sensor{position_sensor(2.0), 1.0, 0.0, 1e4};
    std::vector<std::vector<Vector>> scans;
    std::vector<SensorFrame> frames;
    std::normal_distribution<double> noise(0.0, 1.5);
    for (std::size_t i = 0; i < s; ++i) scans.push_back({mslmb::testing::vec({1.0 + noise(rng), -2.0 + noise(rng)})});
    for (std::size_t i = 0; i < s; ++i) frames.push_back({&sensor, scans[i]});

    const auto ga_updates = parallel_sensor_updates(prior, frames, {}, CollapseMode::WeakMarginal, 1);
    std::vector<LMBDensity> posts;
    Vector mean_of_means = Vector::Zero(4);
    for (const auto& u : ga_updates) {
      posts.push_back(u.posterior);
      mean_of_means += u.posterior.at({0, 1}).spatial.mean() / static_cast<double>(s);
    }
    const std::vector<double> w(s, 1.0 / static_cast<double>(s));
    const auto ga = ga_merge(posts, w).at({0, 1});
    const auto single_update = update_gaussian(prior_g, sensor.map, scans[0][0]).posterior;
    EXPECT_LT(max_abs(ga.spatial.covariance() - single_update.covariance()), 1e-9);
    EXPECT_LT(max_abs(ga.spatial.mean() - mean_of_means), 1e-9);

    const auto pu_updates = parallel_sensor_updates(prior, frames, {}, CollapseMode::BestComponent, 1);
    posts.clear();
    for (const auto& u : pu_updates) posts.push_back(u.posterior);
    const auto pu = pu_merge(prior, posts).at({0, 1});
    const Matrix c = sensor.map.matrix();
    const Matrix expected = prior_g.covariance().inverse() +
                            static_cast<double>(s) * c.transpose() * sensor.map.noise().inverse() * c;
    EXPECT_LT(max_abs(pu.spatial.covariance().inverse() - expected), 1e-9);
  }
}

TEST(GmPower, UnitExponentIsIdentity) {
  const GaussianMixture gm({{0.3, scalar(0, 1)}, {0.7, scalar(3, 2)}});
  const auto out = gm_power_approx(gm, 1.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.components()[1].weight, 0.7);
  EXPECT_EQ(out.components()[1].gaussian.mean(), gm.components()[1].gaussian.mean());
}

TEST(GmPower, SingleComponentHalfPowerDoublesCovariance) {
  std::mt19937_64 rng(8);
  const auto g = mslmb::testing::random_gaussian(3, rng);
  const auto out = gm_power_approx(GaussianMixture({{1.0, g}}), 0.5);
  EXPECT_LT(max_abs(out.components()[0].gaussian.mean() - g.mean()), 1e-12);
  EXPECT_LT(max_abs(out.components()[0].gaussian.covariance() - 2.0 * g.covariance()), 1e-12);
}

TEST(GmPower, SeparatedComponentsMatchNumericalPower) {
  const GaussianMixture gm({{0.5, scalar(-20, 1)}, {0.5, scalar(20, 1)}});
  const auto out = gm_power_approx(gm, 0.5);
  ASSERT_EQ(out.size(), 2u);
  for (const auto& c : out.components()) {
    EXPECT_NEAR(c.weight, 0.5, 1e-12);
    EXPECT_NEAR(c.gaussian.covariance()(0, 0), 2.0, 1e-12);
  }
  EXPECT_NEAR(out.components()[0].gaussian.mean()(0), -20.0, 1e-12);
  const auto powered = [&](double x) { return std::sqrt(gm.density(Vector::Constant(1, x))); };
  const double z = integrate(powered, -40.0, 40.0, 40000);
  for (const double x : {-21.0, -20.0, -18.5, 19.0, 20.0, 22.0}) {
    EXPECT_NEAR(out.density(Vector::Constant(1, x)), powered(x) / z, 1e-8);
  }
}

TEST(GmPower, RejectsExponentOutsideUnitInterval) {
  const GaussianMixture gm({{1.0, scalar(0, 1)}});
  EXPECT_THROW(gm_power_approx(gm, 0.0), std::invalid_argument);
  EXPECT_THROW(gm_power_approx(gm, 1.5), std::invalid_argument);
}

TEST(IcUpdate, ZeroAndSingleFrame) {
  std::mt19937_64 rng(9);
  const auto inst = random_instance(4, 6, rng);
  EXPECT_EQ(ic_update(inst.prior, {}, {}, {}).size(), inst.prior.size());
  const std::vector<SensorFrame> frames{{&inst.sensor, inst.z}};
  const std::vector<std::size_t> order{0};
  const auto ic = ic_update(inst.prior, frames, order, {});
  const auto direct = lbp_update(inst.prior, inst.z, inst.sensor, {}, CollapseMode::WeakMarginal);
  expect_same(ic, direct.posterior, 0.0);
}

TEST(IcUpdate, MissedTwiceDiscountsExistenceTwice) {
  std::mt19937_64 rng(10);
  auto inst = random_instance(3, 0, rng);
  inst.sensor.detection = 0.4;
  const std::vector<SensorFrame> frames{{&inst.sensor, inst.z}, {&inst.sensor, inst.z}};
  const std::vector<std::size_t> order{0, 1};
  const auto out = ic_update(inst.prior, frames, order, {});
  const auto miss = [](double r, double pd) { return r * (1 - pd) / (1 - r * pd); };
  for (const auto& [label, t] : inst.prior) {
    EXPECT_NEAR(out.at(label).existence, miss(miss(t.existence, 0.4), 0.4), 1e-14);
  }
  inst.sensor.detection = 0.0;
  const auto unchanged = ic_update(inst.prior, frames, order, {});
  expect_same(unchanged, inst.prior, 0.0);
}

TEST(MultiSensor, OnlyIcDependsOnOrder) {
  std::mt19937_64 rng(11);
  const auto a = random_instance(4, 5, rng);
  const auto b = random_instance(4, 7, rng);
  const std::vector<SensorFrame> frames{{&a.sensor, a.z}, {&b.sensor, b.z}};
  for (const auto strategy : {FusionStrategy::PU, FusionStrategy::GA, FusionStrategy::IC}) {
    FusionConfig forward{strategy, {}, {0, 1}};
    FusionConfig backward{strategy, {}, {1, 0}};
    const auto mode = default_collapse(strategy);
    const auto x = multi_sensor_update(a.prior, frames, forward, {}, mode, 2);
    const auto y = multi_sensor_update(a.prior, frames, backward, {}, mode, 2);
    double diff = 0.0;
    for (const auto& [label, t] : x) diff = std::max(diff, std::abs(t.existence - y.at(label).existence));
    if (strategy == FusionStrategy::IC) {
      EXPECT_GT(diff, 0.0);
    } else {
      EXPECT_EQ(diff, 0.0);
    }
  }
}

TEST(MultiSensor, DiagnosticsCountUpdates) {
  std::mt19937_64 rng(12);
  const auto a = random_instance(3, 4, rng);
  const std::vector<SensorFrame> frames{{&a.sensor, a.z}, {&a.sensor, a.z}, {&a.sensor, a.z}};
  FusionDiagnostics diag;
  multi_sensor_update(a.prior, frames, {FusionStrategy::GA, {}, {}}, {}, CollapseMode::WeakMarginal, 1, &diag);
  EXPECT_EQ(diag.lbp_updates, 3u);
  EXPECT_GE(diag.lbp_iterations, 3u);
}
