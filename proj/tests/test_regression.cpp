#include <gtest/gtest.h>

#include "hilreach/errors.hpp"
#include "hilreach/regression.hpp"
#include "hilreach/scenario.hpp"
#include "test_support.hpp"

using namespace hilreach;
using namespace testing_support;

namespace {

// Joint over [t, alpha] with two correlated components.
Mixture twoComponent1d() {
  Eigen::Matrix2d s1, s2;
  s1 << 1.0, 0.3, 0.3, 0.5;
  s2 << 0.6, -0.2, -0.2, 0.3;
  return Mixture({{0.4, Eigen::Vector2d(1.0, -0.5), s1}, {0.6, Eigen::Vector2d(3.0, 0.8), s2}});
}

}  // namespace

TEST(SplitBlocks, DiagonalJointHasNoCrossCovariance) {
  Eigen::Matrix3d s = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  const BehaviorModel m = splitBlocks(Mixture({{1.0, Eigen::Vector3d(1.0, 2.0, 3.0), s}}));
  EXPECT_EQ(m.blocks()[0].crossCov, Eigen::Vector2d::Zero());
}

TEST(SplitBlocks, BlocksAreSubmatrices) {
  Eigen::Matrix3d s;
  s << 2.0, 0.3, -0.4, 0.3, 1.0, 0.1, -0.4, 0.1, 1.5;
  const Eigen::Vector3d mu(0.5, -1.0, 2.0);
  const BehaviorModel m = splitBlocks(Mixture({{1.0, mu, s}}));
  const auto& b = m.blocks()[0];
  EXPECT_EQ(b.timeMean, 0.5);
  EXPECT_EQ(b.timeVar, 2.0);
  EXPECT_EQ(b.inputMean, Eigen::Vector2d(-1.0, 2.0));
  EXPECT_EQ(b.crossCov, Eigen::Vector2d(0.3, -0.4));
  EXPECT_EQ(b.inputCov, Eigen::MatrixXd(s.bottomRightCorner(2, 2)));
}

TEST(SplitBlocks, FittedModelIsUsable) {
  const auto data = sample(groundTruthBehavior(), 3000, 4);
  const EmResult fit = fitEm(data, EmConfig{});
  const BehaviorModel m = splitBlocks(fit.mixture);
  for (const auto& c : m.joint()) {
    const Eigen::MatrixXd& s = c.covariance;
    EXPECT_LE((s.block(1, 0, 2, 1) - s.block(0, 1, 1, 2).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SplitBlocks, RejectsNonPositiveTimeVariance) {
  Eigen::Matrix3d s = Eigen::Vector3d(0.0, 1.0, 1.0).asDiagonal();
  EXPECT_THROW(splitBlocks(Mixture({{1.0, Eigen::Vector3d::Zero(), s}})), DataError);
  EXPECT_THROW(splitBlocks(Mixture({{1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)}})),
               DataError);
}

TEST(ConditionOnTime, SingleComponentMatchesTextbookConditioning) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd s = randomSpd(3, rng);
    const Eigen::VectorXd mu = randomVector(3, rng);
    const BehaviorModel m = splitBlocks(Mixture({{1.0, mu, s}}));
    const double t = randomVector(1, rng)[0];
    // Reorder to [alpha, T, t] and condition on the last coordinate.
    Eigen::PermutationMatrix<3> p;
    p.indices() << 2, 0, 1;
    const Eigen::VectorXd muU = p * mu;
    const Eigen::MatrixXd sU = p * s * p.transpose();
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    conditionOnLast(muU, sU, t, mean, cov);
    const InputDistribution d = conditionOnTime(m, t);
    ASSERT_EQ(d.mixture.size(), 1u);
    EXPECT_EQ(d.mixture[0].weight, 1.0);
    EXPECT_LT((d.mixture[0].mean - mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((d.mixture[0].covariance - cov).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ConditionOnTime, ZeroCrossCovarianceOnlyMovesWeights) {
  std::vector<GaussianComponent> comps;
  comps.push_back({0.5, Eigen::Vector3d(0.0, 1.0, -1.0), Eigen::Matrix3d::Identity()});
  comps.push_back({0.5, Eigen::Vector3d(3.0, -2.0, 0.5), Eigen::Matrix3d::Identity() * 0.5});
  const BehaviorModel m = splitBlocks(Mixture(comps));
  const InputDistribution a = conditionOnTime(m, 0.0);
  const InputDistribution b = conditionOnTime(m, 3.0);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.mixture[i].mean, comps[i].mean.tail(2));
    EXPECT_EQ(b.mixture[i].mean, comps[i].mean.tail(2));
  }
  EXPECT_GT(a.mixture[0].weight, a.mixture[1].weight);
  EXPECT_LT(b.mixture[0].weight, b.mixture[1].weight);
}

TEST(ConditionOnTime, GridSliceOracle) {
  const Mixture joint = twoComponent1d();
  const BehaviorModel m = splitBlocks(joint);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ut(-1.0, 5.0);
  const int n = 2001;
  const double lo = -8.0, hi = 8.0, h = (hi - lo) / (n - 1);
  for (int rep = 0; rep < 10; ++rep) {
    const double t = ut(rng);
    std::vector<double> slice(n);
    for (int i = 0; i < n; ++i) slice[i] = density(joint, Eigen::Vector2d(t, lo + i * h));
    double z = 0.5 * (slice.front() + slice.back());
    for (int i = 1; i + 1 < n; ++i) z += slice[i];
    z *= h;
    const Mixture cond = conditionOnTime(m, t).mixture;
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      err = std::max(err, std::abs(slice[i] / z - density(cond, Eigen::VectorXd::Constant(1, lo + i * h))));
    }
    EXPECT_LT(err, 1e-6) << "t = " << t;
  }
}

TEST(ConditionOnTime, WeightsNormalizedAndCovarianceTimeInvariant) {
  const BehaviorModel m = splitBlocks(groundTruthBehavior());
  const InputDistribution ref = conditionOnTime(m, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(-20.0, 30.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const InputDistribution d = conditionOnTime(m, ut(rng));
    double sum = 0.0;
    for (std::size_t i = 0; i < d.mixture.size(); ++i) {
      sum += d.mixture[i].weight;
      EXPECT_EQ(d.mixture[i].covariance, ref.mixture[i].covariance);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(ConditionOnTime, ConditionalCovarianceIsPsd) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const BehaviorModel m = splitBlocks(randomMixture(3, 3, rng));
    for (const auto& b : m.blocks()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.conditionalCov);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(ConditionOnTime, FarExtrapolationFallsBackToPrior) {
  const BehaviorModel m = splitBlocks(groundTruthBehavior());
  const InputDistribution d = conditionOnTime(m, 1e3);
  EXPECT_TRUE(d.priorFallback);
  for (std::size_t i = 0; i < d.mixture.size(); ++i) {
    EXPECT_NEAR(d.mixture[i].weight, m.blocks()[i].weight, 1e-12);
  }
  EXPECT_FALSE(conditionOnTime(m, 2.0).priorFallback);
  EXPECT_THROW(conditionOnTime(m, std::nan("")), ConfigError);
}

TEST(RegressionCurve, ConstantModelIsFlat) {
  const Eigen::Vector3d mu(1.0, 0.2, -0.3);
  const BehaviorModel m = splitBlocks(Mixture({{1.0, mu, Eigen::Matrix3d::Identity() * 0.1}}));
  for (const auto& p : regressionCurve(m, 0.0, 4.5, 0.04)) {
    EXPECT_EQ(p.mean, mu.tail(2));
  }
}

TEST(RegressionCurve, PointCount) {
  const BehaviorModel m = splitBlocks(groundTruthBehavior());
  const auto curve = regressionCurve(m, 0.0, 4.5, 0.04);
  ASSERT_EQ(curve.size(), 113u);
  EXPECT_NEAR(curve.back().t, 4.48, 1e-12);
}

TEST(RegressionCurve, RecoveredModelTracksGroundTruth) {
  const Mixture truth = groundTruthBehavior();
  const auto data = sample(truth, 121 * 113, 31);
  const BehaviorModel fitted = splitBlocks(fitEm(data, EmConfig{}).mixture);
  const BehaviorModel reference = splitBlocks(truth);
  const auto a = regressionCurve(fitted, 0.0, 4.5, 0.04);
  const auto b = regressionCurve(reference, 0.0, 4.5, 0.04);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LT((a[i].mean - b[i].mean).cwiseAbs().maxCoeff(), 0.05) << a[i].t;
  }
}
