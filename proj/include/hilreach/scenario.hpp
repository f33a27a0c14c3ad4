#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hilreach/plant.hpp"
#include "hilreach/propagate.hpp"
#include "hilreach/regression.hpp"
#include "hilreach/risk.hpp"
#include "hilreach/trajio.hpp"

namespace hilreach {

struct Rect {
  double xMin = 0.0, xMax = 0.0;
  double yMin = 0.0, yMax = 0.0;

  bool contains(double x, double y) const noexcept {
    return x >= xMin && x <= xMax && y >= yMin && y <= yMax;
  }
  // Disc of `radius` around (x, y) touches the rectangle.
  bool touchesDisc(double x, double y, double radius) const noexcept;
  double centerX() const noexcept { return 0.5 * (xMin + xMax); }
};

struct SpawnRule {
  double earliest = 4.0;  // s
  double latest = 8.0;    // s
  std::vector<Rect> candidates{
      {-2.5, -0.5, 12.0, 13.0},
      {-1.0, 1.0, 12.0, 13.0},
      {0.5, 2.5, 12.0, 13.0},
      {-1.0, 1.0, 13.0, 14.0},
  };
};

/// Landing-mission layout: vertical lanes, a touchpad on the ground and an
/// obstacle that pops up in the centre lane at a seeded time and place.
struct WorldConfig {
  std::vector<double> laneBoundaries{-12.0, -4.0, 4.0, 12.0};
  double groundY = 0.0;
  double ceilingY = 40.0;
  Rect touchpad{-1.5, 1.5, -0.1, 0.0};
  SpawnRule spawn;
  double vehicleRadius = 0.2;
  double landingSpeed = 1.0;  // max |v_y| at touchdown
  double startX = 0.0;
  double startY = 30.0;
  double startDescent = 0.0;  // m/s, 0 starts in hover
  double maxDuration = 90.0;  // s, trials are aborted afterwards

  // Throws ConfigError for unordered lanes, empty candidate list, candidates
  // outside the lanes or a touchpad off the ground.
  void validate() const;
  StateVector startState() const;
  double laneCenter(std::size_t lane) const;
  std::size_t laneOf(double x) const;
};

struct World {
  WorldConfig config;
  std::uint64_t seed = 0;
  int spawnStep = 0;        // tick at which the obstacle appears
  double spawnTime = 0.0;   // spawnStep * dt
  Rect spawnRect;           // where it will appear
  std::optional<Rect> obstacle;
};

// Draws the spawn tick uniformly from the rule's window (on the dt grid) and
// one candidate rectangle, both from `seed`.
World makeWorld(const WorldConfig& config, std::uint64_t seed, double dt);

enum class WorldEvent { ObstacleSpawned, Landed, Collided, LeftBounds };

std::string_view toString(WorldEvent event);

struct WorldStep {
  std::vector<WorldEvent> events;
  World world;
};

// Events for the vehicle at `state` at simulated time t. The obstacle spawns
// once, at the first call with t >= spawnTime.
WorldStep stepWorld(const World& world, const StateVector& state, double t);

bool isTerminal(WorldEvent event) noexcept;
Outcome outcomeOf(WorldEvent event) noexcept;

/// Feedback gains of the scripted pilot. Lateral: alpha = -(kx ex + ktheta
/// theta + kvx v_x + kw w); vertical: T = kvy (v_ref - v_y).
struct PilotPolicy {
  double kx = 0.02;
  double ktheta = 0.6;
  double kvx = 0.055;
  double kw = 0.02;
  double maxLateralError = 4.0;  // m, clamps the tracked position error
  double kvy = 1.0;
  double descentSpeed = 1.0;     // m/s before the spawn and while detouring
  double finalDescent = 0.4;     // m/s close to the ground
  double clearance = 1.5;        // m kept around the obstacle
  double windowDuration = 4.5;   // s of behavior-model inputs after the spawn
};

struct SyntheticPilot {
  BehaviorModel behavior;
  PilotPolicy policy;
  std::uint64_t noiseSeed = 0;
};

// Trial i uses world seed deriveSeed(seed, i) and its own noise stream.
// Behavior-window inputs come from conditionOnTime(behavior, t - t_spawn)
// and every applied input is saturated.
std::vector<Trajectory> generateSyntheticTrials(const SyntheticPilot& pilot,
                                                const WorldConfig& world,
                                                const PlantModel& plant, std::size_t n,
                                                std::uint64_t seed);

Trajectory simulateTrial(const SyntheticPilot& pilot, const WorldConfig& world,
                         const PlantModel& plant, std::uint64_t seed);

// Policy input before the spawn: hold the lane centre, descend steadily.
InputVector preSpawnInput(const PilotPolicy& policy, const WorldConfig& world,
                          const StateVector& x);
// Policy input after the behavior window: detour around the obstacle through
// the nearer side lane, return above the touchpad and land.
InputVector landingInput(const PilotPolicy& policy, const World& world, const StateVector& x);

/// Three-component ground-truth pilot over [t, alpha, T]: evade left, evade
/// right and brake. All components share the time moments of a 4.5 s window
/// sampled every 0.04 s, so windowed trial data moment-matches the model.
Mixture groundTruthBehavior();

// Initial uncertainty around x0: three equally weighted components with
// covariance diag(1.5, 1.5, 0.05, 1, 2, 0.05) and offsets 0,
// (1, 1, 0.1, 1, 1, 0.05) and (-1, 1, -0.1, -1, -1, -0.05).
Mixture initialUncertainty(const StateVector& x0);

StateVector defaultSpawnState();
Belief defaultInitialBelief();
DangerZone defaultDangerZone();

}  // namespace hilreach
