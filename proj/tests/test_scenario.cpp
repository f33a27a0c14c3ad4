#include <gtest/gtest.h>

#include "hilreach/errors.hpp"
#include "hilreach/scenario.hpp"
#include "test_support.hpp"

using namespace hilreach;
using namespace hilreach::state;
using namespace testing_support;

namespace {

StateVector at(double x, double y, double vy = 0.0) {
  StateVector s = StateVector::Zero();
  s[kPx] = x;
  s[kPy] = y;
  s[kVy] = vy;
  return s;
}

std::size_t countEvents(const Trajectory& t, const World& initial, WorldEvent kind) {
  World w = initial;
  std::size_t n = 0;
  for (const auto& s : t.samples) {
    auto r = stepWorld(w, s.state, s.t);
    w = r.world;
    n += static_cast<std::size_t>(std::count(r.events.begin(), r.events.end(), kind));
  }
  return n;
}

}  // namespace

TEST(World, DefaultsValidate) {
  EXPECT_NO_THROW(WorldConfig{}.validate());
  WorldConfig bad;
  bad.laneBoundaries = {1.0, 0.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.spawn.candidates = {{30.0, 31.0, 5.0, 6.0}};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.touchpad = {-1.0, 1.0, 0.5, 1.0};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(World, SpawnScheduleIsSeededAndOnGrid) {
  const WorldConfig cfg;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const World w = makeWorld(cfg, seed, 0.04);
    EXPECT_GE(w.spawnTime, cfg.spawn.earliest - 1e-9);
    EXPECT_LE(w.spawnTime, cfg.spawn.latest + 1e-9);
    EXPECT_EQ(w.spawnTime, w.spawnStep * 0.04);
    const World again = makeWorld(cfg, seed, 0.04);
    EXPECT_EQ(again.spawnStep, w.spawnStep);
    EXPECT_EQ(again.spawnRect.xMin, w.spawnRect.xMin);
    EXPECT_FALSE(w.obstacle.has_value());
  }
}

TEST(StepWorld, QuietBeforeSpawn) {
  const World w = makeWorld(WorldConfig{}, 1, 0.04);
  EXPECT_TRUE(stepWorld(w, at(0.0, 20.0), 0.0).events.empty());
}

TEST(StepWorld, SpawnsExactlyOnce) {
  World w = makeWorld(WorldConfig{}, 1, 0.04);
  auto r = stepWorld(w, at(0.0, 30.0), w.spawnTime);
  ASSERT_EQ(r.events, std::vector<WorldEvent>{WorldEvent::ObstacleSpawned});
  EXPECT_TRUE(r.world.obstacle.has_value());
  EXPECT_TRUE(stepWorld(r.world, at(0.0, 30.0), w.spawnTime + 0.04).events.empty());
}

TEST(StepWorld, LandingClassification) {
  const World w = makeWorld(WorldConfig{}, 1, 0.04);
  EXPECT_EQ(stepWorld(w, at(0.2, -0.01, -0.5), 1.0).events, std::vector<WorldEvent>{WorldEvent::Landed});
  EXPECT_EQ(stepWorld(w, at(0.2, -0.01, -3.0), 1.0).events, std::vector<WorldEvent>{WorldEvent::Collided});
  EXPECT_EQ(stepWorld(w, at(6.0, -0.01, -0.5), 1.0).events, std::vector<WorldEvent>{WorldEvent::Collided});
  EXPECT_EQ(stepWorld(w, at(20.0, 10.0), 1.0).events, std::vector<WorldEvent>{WorldEvent::LeftBounds});
  EXPECT_EQ(stepWorld(w, at(0.0, 50.0), 1.0).events, std::vector<WorldEvent>{WorldEvent::LeftBounds});
}

TEST(StepWorld, StraightDescentHitsObstacleAtFirstOverlap) {
  World w = makeWorld(WorldConfig{}, 3, 0.04);
  w.obstacle = Rect{-1.0, 1.0, 12.0, 13.0};
  const double vy = -1.0, dt = 0.04, y0 = 16.0;
  // Disc of radius 0.2 first reaches the top face when y - 0.2 <= 13.
  const int expected = static_cast<int>(std::ceil((y0 - 13.2) / (-vy * dt) - 1e-9));
  int hit = -1;
  for (int k = 0; k < 200 && hit < 0; ++k) {
    const auto r = stepWorld(w, at(0.3, y0 + vy * dt * k, vy), 10.0 + k * dt);
    if (!r.events.empty()) {
      EXPECT_EQ(r.events, std::vector<WorldEvent>{WorldEvent::Collided});
      hit = k;
    }
  }
  EXPECT_EQ(hit, expected);
}

TEST(Trials, GeneratesRequestedCountWithConsistentSidecars) {
  const PlantModel plant = buildPlant({});
  SyntheticPilot pilot{splitBlocks(groundTruthBehavior()), {}, 0};
  const WorldConfig cfg;
  const auto trials = generateSyntheticTrials(pilot, cfg, plant, 121, 1);
  ASSERT_EQ(trials.size(), 121u);
  std::size_t landed = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trajectory& t = trials[i];
    EXPECT_NO_THROW(t.validate());
    ASSERT_TRUE(t.spawnTime.has_value());
    landed += t.outcome == Outcome::Landed;
    const auto& last = t.samples.back();
    EXPECT_EQ(last.input, InputVector::Zero());
    for (const auto& s : t.samples) {
      EXPECT_LE(std::abs(s.input[0]), 0.5);
      EXPECT_LE(std::abs(s.input[1]), 1.7);
    }
  }
  EXPECT_GT(landed, 110u);
}

TEST(Trials, SpawnEventMatchesSidecar) {
  const PlantModel plant = buildPlant({});
  SyntheticPilot pilot{splitBlocks(groundTruthBehavior()), {}, 0};
  const std::uint64_t seed = 77;
  const Trajectory t = simulateTrial(pilot, WorldConfig{}, plant, seed);
  const World w = makeWorld(WorldConfig{}, seed, 0.04);
  EXPECT_EQ(*t.spawnTime, w.spawnTime);
  EXPECT_EQ(countEvents(t, w, WorldEvent::ObstacleSpawned), 1u);
  const std::size_t terminal = countEvents(t, w, WorldEvent::Landed) + countEvents(t, w, WorldEvent::Collided) +
                               countEvents(t, w, WorldEvent::LeftBounds);
  EXPECT_LE(terminal, 1u);
  EXPECT_EQ(terminal == 1u, t.outcome != Outcome::Aborted);
}

TEST(Trials, DeterministicPerSeed) {
  const PlantModel plant = buildPlant({});
  SyntheticPilot pilot{splitBlocks(groundTruthBehavior()), {}, 0};
  const auto a = generateSyntheticTrials(pilot, WorldConfig{}, plant, 5, 9);
  const auto b = generateSyntheticTrials(pilot, WorldConfig{}, plant, 5, 9);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(trajectoryCsv(a[i]), trajectoryCsv(b[i]));
  EXPECT_THROW(generateSyntheticTrials(pilot, WorldConfig{}, plant, 0, 9), ConfigError);
}

TEST(Trials, ZeroCovariancePilotRepeatsWindowInputs) {
  // Inputs are an exact affine function of time since spawn.
  const double var = 1.7024;
  const Eigen::Vector2d gain(0.01, -0.05);
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  s(0, 0) = var;
  s.block<2, 1>(1, 0) = gain * var;
  s.block<1, 2>(0, 1) = (gain * var).transpose();
  s.block<2, 2>(1, 1) = gain * gain.transpose() * var;
  SyntheticPilot pilot{splitBlocks(Mixture({{1.0, Eigen::Vector3d(2.24, 0.0, 0.1), s}})), {}, 0};
  const PlantModel plant = buildPlant({});
  const auto trials = generateSyntheticTrials(pilot, WorldConfig{}, plant, 6, 4);
  std::vector<InputVector> reference;
  for (const auto& t : trials) {
    const std::size_t k0 = *t.spawnIndex();
    std::vector<InputVector> window;
    for (std::size_t k = k0; k < k0 + 113 && k < t.samples.size(); ++k) window.push_back(t.samples[k].input);
    if (reference.empty()) reference = window;
    ASSERT_EQ(window.size(), reference.size());
    for (std::size_t k = 0; k < window.size(); ++k) EXPECT_LT((window[k] - reference[k]).norm(), 1e-12);
  }
}

TEST(Trials, WindowedDataRecoversPilotModel) {
  const Mixture truth = groundTruthBehavior();
  SyntheticPilot pilot{splitBlocks(truth), {}, 0};
  const auto trials = generateSyntheticTrials(pilot, WorldConfig{}, buildPlant({}), 121, 2024);
  std::vector<TrainingWindow> windows;
  for (const auto& t : trials) {
    try {
      windows.push_back(extractWindow(t, 4.5));
    } catch (const WindowRejected&) {
    }
  }
  ASSERT_GT(windows.size(), 110u);
  const EmResult fit = fitEm(concatenateWindows(windows), EmConfig{});
  Eigen::MatrixXd cost(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cost(i, j) = (truth[i].mean - fit.mixture[j].mean).norm();
  const auto match = bestMatching(cost);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((fit.mixture[static_cast<std::size_t>(match[i])].mean - truth[i].mean).cwiseAbs().maxCoeff(), 0.1);
  }
}

TEST(Scenario, InitialBeliefShape) {
  const Belief b = defaultInitialBelief();
  ASSERT_EQ(b.mixture.size(), 3u);
  for (const auto& c : b.mixture) {
    EXPECT_NEAR(c.weight, 1.0 / 3.0, 1e-15);
    Eigen::VectorXd d(6);
    d << 1.5, 1.5, 0.05, 1.0, 2.0, 0.05;
    EXPECT_EQ(c.covariance, Eigen::MatrixXd(d.asDiagonal()));
  }
  EXPECT_EQ(b.time, 0.0);
}
