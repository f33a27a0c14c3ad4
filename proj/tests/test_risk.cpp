#include <gtest/gtest.h>

#include "hilreach/errors.hpp"
#include "hilreach/oracle.hpp"
#include "hilreach/risk.hpp"
#include "hilreach/scenario.hpp"
#include "test_support.hpp"

using namespace hilreach;
using namespace hilreach::state;
using namespace testing_support;

namespace {

Belief randomBelief(std::mt19937_64& rng, int k = 4) { return {randomMixture(6, k, rng), 0.0, 0}; }

}  // namespace

TEST(Risk, WholePlaneHasProbabilityOne) {
  std::mt19937_64 rng(1);
  EXPECT_NEAR(collisionProbability(randomBelief(rng), {-1e6, 1e6, -1e6, 1e6}), 1.0, 1e-6);
}

TEST(Risk, FarZoneHasNegligibleProbability) {
  const Belief b{Mixture({{1.0, Eigen::VectorXd::Zero(6), Eigen::MatrixXd::Identity(6, 6)}}), 0.0, 0};
  EXPECT_LT(collisionProbability(b, {50.0, 60.0, -1.0, 1.0}), 1e-12);
  EXPECT_LT(collisionProbability(b, {-5.0, 5.0, -80.0, -50.0}), 1e-12);
}

TEST(Risk, DiagonalCovarianceSeparableClosedForm) {
  const Eigen::Vector2d m(0.3, -0.7);
  const Eigen::Matrix2d s = Eigen::Vector2d(1.7, 0.4).asDiagonal();
  const DangerZone z{-1.0, 2.0, -1.5, 0.2};
  const double expected =
      (normalCdf((z.xMax - m[0]) / std::sqrt(s(0, 0))) - normalCdf((z.xMin - m[0]) / std::sqrt(s(0, 0)))) *
      (normalCdf((z.yMax - m[1]) / std::sqrt(s(1, 1))) - normalCdf((z.yMin - m[1]) / std::sqrt(s(1, 1))));
  EXPECT_NEAR(rectangleProbability(m, s, z), expected, 1e-8);
}

TEST(Risk, CorrelatedCovarianceMatchesSimpsonOracle) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Vector2d m = randomVector(2, rng);
    const Eigen::Matrix2d s = randomSpd(2, rng, 2.0);
    const DangerZone z{-1.0, 1.5, -2.0, 0.5};
    EXPECT_NEAR(rectangleProbability(m, s, z), rectangleSimpson(m, s, z.xMin, z.xMax, z.yMin, z.yMax), 1e-8);
  }
}

TEST(Risk, DegenerateDirectionsAsLimits) {
  const Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  const DangerZone z{-1.0, 1.0, -1.0, 1.0};
  EXPECT_EQ(rectangleProbability(Eigen::Vector2d(0.0, 0.0), zero, z), 1.0);
  EXPECT_EQ(rectangleProbability(Eigen::Vector2d(3.0, 0.0), zero, z), 0.0);
  Eigen::Matrix2d lineY = Eigen::Matrix2d::Zero();
  lineY(1, 1) = 1.0;
  EXPECT_NEAR(rectangleProbability(Eigen::Vector2d(0.0, 0.0), lineY, z), normalCdf(1.0) - normalCdf(-1.0), 1e-12);
}

TEST(Risk, AdditiveOverPartition) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Belief b = randomBelief(rng);
    const DangerZone whole{-2.0, 3.0, -4.0, 1.0};
    const double parts = collisionProbability(b, {-2.0, 0.5, -4.0, -1.0}) +
                         collisionProbability(b, {0.5, 3.0, -4.0, -1.0}) +
                         collisionProbability(b, {-2.0, 0.5, -1.0, 1.0}) +
                         collisionProbability(b, {0.5, 3.0, -1.0, 1.0});
    EXPECT_NEAR(parts, collisionProbability(b, whole), 4e-8);
  }
}

TEST(Risk, MonotoneInZoneInclusion) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const Belief b = randomBelief(rng);
    EXPECT_LE(collisionProbability(b, {-1.0, 1.0, -1.0, 1.0}), collisionProbability(b, {-1.5, 1.2, -1.0, 3.0}) + 1e-8);
  }
}

TEST(Risk, ProfileEdgeCases) {
  const BeliefTrajectory traj =
      predict(defaultInitialBelief(), buildPlant({}), splitBlocks(groundTruthBehavior()), PredictConfig{});
  const auto none = riskProfile(traj, {1000.0, 1001.0, 1000.0, 1001.0});
  const auto all = riskProfile(traj, {-1e6, 1e6, -1e6, 1e6});
  ASSERT_EQ(none.size(), 101u);
  for (std::size_t k = 0; k < none.size(); ++k) {
    EXPECT_NEAR(none[k].t, 0.04 * static_cast<double>(k), 1e-12);
    EXPECT_EQ(none[k].probability, 0.0);
    EXPECT_NEAR(all[k].probability, 1.0, 1e-6);
  }
}

TEST(Risk, AgreesWithMonteCarloWithinBinomialBand) {
  const PlantModel plant = buildPlant({});
  const BehaviorModel model = splitBlocks(groundTruthBehavior());
  const DangerZone zone = defaultDangerZone();
  const BeliefTrajectory traj = predict(defaultInitialBelief(), plant, model, PredictConfig{});
  McConfig mc;
  mc.samples = 5000;
  mc.seed = 11;
  mc.snapshotSteps = {stepsFor(1.5, 0.04), stepsFor(3.0, 0.04), 100};
  const McResult res = runMonteCarlo(defaultInitialBelief(), plant, &model, mc);
  for (int k : mc.snapshotSteps) {
    const double p = collisionProbability(traj.steps[static_cast<std::size_t>(k)], zone);
    std::size_t hits = 0;
    for (const auto& x : res.snapshots.at(k)) hits += zone.contains(x[kPx], x[kPy]);
    const double frac = static_cast<double>(hits) / 5000.0;
    EXPECT_LE(std::abs(p - frac), 3.0 * std::sqrt(p * (1.0 - p) / 5000.0)) << "step " << k;
  }
}

TEST(Risk, InvalidZoneRejected) {
  std::mt19937_64 rng(5);
  EXPECT_THROW(collisionProbability(randomBelief(rng), {1.0, 0.0, 0.0, 1.0}), ConfigError);
}
