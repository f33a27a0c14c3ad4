#include <gtest/gtest.h>

#include "hilreach/errors.hpp"
#include "hilreach/plant.hpp"
#include "test_support.hpp"

using namespace hilreach;
using namespace hilreach::state;

TEST(Plant, DefaultsAreNominalValues) {
  const PlantParams p;
  EXPECT_EQ(p.dt, 0.04);
  EXPECT_EQ(p.g, 9.8);
  EXPECT_EQ(p.mass, 0.25);
  EXPECT_EQ(p.inertiaX, 0.01);
  EXPECT_EQ(p.k1, -0.1);
  EXPECT_EQ(p.k2, -1.0);
  EXPECT_EQ(p.k3, -30.0);
  EXPECT_EQ(p.alphaBounds.lo, -0.5);
  EXPECT_EQ(p.alphaBounds.hi, 0.5);
  EXPECT_EQ(p.thrustBounds.lo, -1.7);
  EXPECT_EQ(p.thrustBounds.hi, 1.7);
}

TEST(Plant, EntriesMatchWrittenOutMatrices) {
  const PlantModel pm = buildPlant({});
  const double dt = 0.04;
  StateMatrix a = StateMatrix::Identity();
  a(0, 3) = dt;
  a(1, 4) = dt;
  a(2, 5) = dt;
  a(3, 2) = 9.8 * dt;
  a(4, 4) = 1.0 - 0.1 * dt;
  a(5, 2) = -1.0 * dt;
  a(5, 5) = 1.0 - 30.0 * dt;
  InputMatrix b = InputMatrix::Zero();
  b(4, 1) = dt / 0.25;
  b(5, 0) = dt / 0.01;
  EXPECT_LE((pm.A - a).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((pm.B - b).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(pm.A(3, 2), 0.392, 1e-15);
  EXPECT_NEAR(pm.B(4, 1), 0.16, 1e-15);
  EXPECT_NEAR(pm.B(5, 0), 4.0, 1e-15);
}

TEST(Plant, SparsityStructure) {
  const PlantModel pm = buildPlant({});
  EXPECT_EQ((pm.A.array() != 0.0).count(), 11);
  EXPECT_EQ((pm.B.array() != 0.0).count(), 2);
}

TEST(Plant, ZeroStepIsIdentity) {
  PlantParams p;
  p.dt = 0.0;
  const PlantModel pm = buildPlant(p);
  EXPECT_EQ(pm.A, StateMatrix::Identity());
  EXPECT_EQ(pm.B, InputMatrix::Zero());
}

TEST(Plant, InvalidParametersRejected) {
  PlantParams p;
  p.mass = 0.0;
  EXPECT_THROW(buildPlant(p), ConfigError);
  p = {};
  p.alphaBounds = {1.0, -1.0};
  EXPECT_THROW(buildPlant(p), ConfigError);
  p = {};
  p.dt = -0.1;
  EXPECT_THROW(buildPlant(p), ConfigError);
}

TEST(PlantStep, ZeroStaysZero) {
  const PlantModel pm = buildPlant({});
  EXPECT_EQ(step(pm, StateVector::Zero(), InputVector::Zero(), false), StateVector::Zero());
}

TEST(PlantStep, ThrustExcitesVerticalVelocityOnly) {
  const PlantModel pm = buildPlant({});
  const StateVector x = step(pm, StateVector::Zero(), InputVector(0.0, 1.0), false);
  StateVector expected = StateVector::Zero();
  expected[kVy] = 1.0 * 0.04 / 0.25;
  EXPECT_EQ(x, expected);
}

TEST(PlantStep, AttitudeOffsetAcceleratesLaterally) {
  const PlantModel pm = buildPlant({});
  StateVector x = StateVector::Zero();
  x[kTheta] = 0.1;
  EXPECT_NEAR(step(pm, x, InputVector::Zero(), false)[kVx], 0.0392, 1e-15);
}

TEST(PlantStep, Linearity) {
  const PlantModel pm = buildPlant({});
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const StateVector x1 = testing_support::randomVector(6, rng);
    const StateVector x2 = testing_support::randomVector(6, rng);
    const InputVector u1 = testing_support::randomVector(2, rng);
    const InputVector u2 = testing_support::randomVector(2, rng);
    const StateVector lhs = step(pm, x1 + x2, u1 + u2, false);
    const StateVector rhs = step(pm, x1, u1, false) + step(pm, x2, u2, false) -
                            step(pm, StateVector::Zero(), InputVector::Zero(), false);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PlantStep, SaturationOnlyClampsOutOfBoundInputs) {
  const PlantModel pm = buildPlant({});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ua(-0.5, 0.5), ut(-1.7, 1.7);
  for (int rep = 0; rep < 100; ++rep) {
    const StateVector x = testing_support::randomVector(6, rng);
    const InputVector u(ua(rng), ut(rng));
    EXPECT_EQ(step(pm, x, u, true), step(pm, x, u, false));
  }
  const StateVector x = StateVector::Zero();
  EXPECT_EQ(step(pm, x, InputVector(2.0, -5.0), true), step(pm, x, InputVector(0.5, -1.7), false));
  EXPECT_EQ(pm.saturate(InputVector(2.0, 5.0)), InputVector(0.5, 1.7));
}

TEST(PlantRollout, MatchesStepLoop) {
  const PlantModel pm = buildPlant({});
  std::mt19937_64 rng(8);
  std::vector<InputVector> us;
  for (int i = 0; i < 50; ++i) us.push_back(testing_support::randomVector(2, rng));
  StateVector x = testing_support::randomVector(6, rng);
  const auto path = rollout(pm, x, us, true);
  ASSERT_EQ(path.size(), 51u);
  EXPECT_EQ(path[0], x);
  for (int i = 0; i < 50; ++i) {
    x = step(pm, x, us[static_cast<std::size_t>(i)], true);
    EXPECT_EQ(path[static_cast<std::size_t>(i + 1)], x);
  }
}

TEST(PlantRollout, ConstantThrustClosedForm) {
  const PlantModel pm = buildPlant({});
  const double thrust = 0.7, v0 = -0.3, p0 = 10.0;
  StateVector x0 = StateVector::Zero();
  x0[kPy] = p0;
  x0[kVy] = v0;
  const std::vector<InputVector> us(100, InputVector(0.0, thrust));
  const auto path = rollout(pm, x0, us, false);
  const double a = 1.0 - 0.1 * 0.04;
  const double b = 0.04 / 0.25 * thrust;
  const double vInf = b / (1.0 - a);
  for (int k = 0; k <= 100; ++k) {
    const double vk = vInf + (v0 - vInf) * std::pow(a, k);
    const double pk = p0 + 0.04 * (k * vInf + (v0 - vInf) * (1.0 - std::pow(a, k)) / (1.0 - a));
    EXPECT_NEAR(path[static_cast<std::size_t>(k)][kVy], vk, 1e-12);
    EXPECT_NEAR(path[static_cast<std::size_t>(k)][kPy], pk, 1e-11);
    EXPECT_EQ(path[static_cast<std::size_t>(k)][kPx], 0.0);
  }
}

TEST(StepsFor, RoundsDownWithTolerance) {
  EXPECT_EQ(stepsFor(4.0, 0.04), 100);
  EXPECT_EQ(stepsFor(3.0, 0.04), 75);
  EXPECT_EQ(stepsFor(1.5, 0.04), 37);
  EXPECT_EQ(stepsFor(0.0, 0.04), 0);
  EXPECT_THROW(stepsFor(1.0, 0.0), ConfigError);
}
