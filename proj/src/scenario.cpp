#include "hilreach/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "hilreach/errors.hpp"
#include "hilreach/rng.hpp"

namespace hilreach {
namespace {

constexpr double kTimeEps = 1e-9;

// Time moments of the grid 0, dt, ..., (n - 1) dt.
struct GridMoments {
  double mean;
  double variance;
};

GridMoments gridMoments(double duration, double dt) {
  const double n = static_cast<double>(windowRows(duration, dt));
  return {0.5 * (n - 1.0) * dt, dt * dt * (n * n - 1.0) / 12.0};
}

// Joint [t, u] Gaussian whose conditional u | t has mean mu + K (t - mt) and
// covariance `inputCov` when t ~ N(mt, vt).
GaussianComponent linearComponent(double weight, const GridMoments& time,
                                  const Eigen::Vector2d& inputMean, const Eigen::Vector2d& slope,
                                  const Eigen::Matrix2d& inputCov) {
  GaussianComponent c;
  c.weight = weight;
  c.mean = Eigen::Vector3d(time.mean, inputMean[0], inputMean[1]);
  Eigen::Matrix3d cov;
  cov(0, 0) = time.variance;
  cov.block<2, 1>(1, 0) = slope * time.variance;
  cov.block<1, 2>(0, 1) = (slope * time.variance).transpose();
  cov.block<2, 2>(1, 1) = inputCov + slope * slope.transpose() * time.variance;
  c.covariance = cov;
  return c;
}

double pickSide(const World& world, double px) {
  const auto& lanes = world.config.laneBoundaries;
  const double obstacleX = world.obstacle ? world.obstacle->centerX() : 0.0;
  const double left = 0.5 * (lanes[0] + lanes[1]);
  const double right = 0.5 * (lanes[lanes.size() - 2] + lanes.back());
  return px < obstacleX ? left : right;
}

double lateralInput(const PilotPolicy& p, const StateVector& x, double targetX) {
  const double ex = std::clamp(x[state::kPx] - targetX, -p.maxLateralError, p.maxLateralError);
  return -(p.kx * ex + p.ktheta * x[state::kTheta] + p.kvx * x[state::kVx] +
           p.kw * x[state::kOmega]);
}

}  // namespace

bool Rect::touchesDisc(double x, double y, double radius) const noexcept {
  const double dx = std::max({xMin - x, 0.0, x - xMax});
  const double dy = std::max({yMin - y, 0.0, y - yMax});
  return dx * dx + dy * dy <= radius * radius;
}

void WorldConfig::validate() const {
  if (laneBoundaries.size() < 2) throw ConfigError("world needs at least two lane boundaries");
  if (!std::is_sorted(laneBoundaries.begin(), laneBoundaries.end()) ||
      std::adjacent_find(laneBoundaries.begin(), laneBoundaries.end()) != laneBoundaries.end()) {
    throw ConfigError("lane boundaries must be strictly increasing");
  }
  if (!(ceilingY > groundY)) throw ConfigError("ceiling must be above the ground");
  if (!(touchpad.xMin < touchpad.xMax) || std::abs(touchpad.yMax - groundY) > kTimeEps) {
    throw ConfigError("touchpad must be a non-empty strip whose top is the ground");
  }
  if (spawn.candidates.empty()) throw ConfigError("spawn rule has no candidate obstacles");
  if (!(spawn.earliest >= 0.0) || !(spawn.latest >= spawn.earliest)) {
    throw ConfigError("spawn window must satisfy 0 <= earliest <= latest");
  }
  for (const auto& r : spawn.candidates) {
    if (!(r.xMin < r.xMax) || !(r.yMin < r.yMax)) throw ConfigError("empty obstacle candidate");
    if (r.xMin < laneBoundaries.front() || r.xMax > laneBoundaries.back() || r.yMin < groundY) {
      throw ConfigError("obstacle candidate outside the lanes");
    }
  }
  if (!(vehicleRadius >= 0.0) || !(landingSpeed > 0.0) || !(maxDuration > 0.0)) {
    throw ConfigError("vehicle radius, landing speed and max duration must be positive");
  }
  if (startX < laneBoundaries.front() || startX > laneBoundaries.back() || startY <= groundY ||
      startY >= ceilingY) {
    throw ConfigError("start position outside the world");
  }
}

StateVector WorldConfig::startState() const {
  StateVector x = StateVector::Zero();
  x[state::kPx] = startX;
  x[state::kPy] = startY;
  x[state::kVy] = -startDescent;
  return x;
}

double WorldConfig::laneCenter(std::size_t lane) const {
  if (lane + 1 >= laneBoundaries.size()) throw ConfigError("lane index out of range");
  return 0.5 * (laneBoundaries[lane] + laneBoundaries[lane + 1]);
}

std::size_t WorldConfig::laneOf(double x) const {
  const auto it = std::upper_bound(laneBoundaries.begin(), laneBoundaries.end(), x);
  const auto idx = static_cast<std::size_t>(std::distance(laneBoundaries.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, laneBoundaries.size() - 2);
}

World makeWorld(const WorldConfig& config, std::uint64_t seed, double dt) {
  config.validate();
  if (!(dt > 0.0)) throw ConfigError("world step requires dt > 0");
  World w;
  w.config = config;
  w.seed = seed;
  CounterRng rng(seed, 0);
  const auto first = static_cast<std::uint64_t>(std::ceil(config.spawn.earliest / dt - kTimeEps));
  const auto last = static_cast<std::uint64_t>(std::floor(config.spawn.latest / dt + kTimeEps));
  const std::uint64_t span = last >= first ? last - first + 1 : 1;
  w.spawnStep = static_cast<int>(first + rng() % span);
  w.spawnTime = w.spawnStep * dt;
  w.spawnRect = config.spawn.candidates[rng() % config.spawn.candidates.size()];
  return w;
}

std::string_view toString(WorldEvent event) {
  switch (event) {
    case WorldEvent::ObstacleSpawned:
      return "obstacleSpawned";
    case WorldEvent::Landed:
      return "landed";
    case WorldEvent::Collided:
      return "collided";
    case WorldEvent::LeftBounds:
      return "leftBounds";
  }
  return "leftBounds";
}

WorldStep stepWorld(const World& world, const StateVector& x, double t) {
  WorldStep out{{}, world};
  const auto& cfg = world.config;
  if (!out.world.obstacle && t >= world.spawnTime - kTimeEps) {
    out.world.obstacle = world.spawnRect;
    out.events.push_back(WorldEvent::ObstacleSpawned);
  }
  const double px = x[state::kPx];
  const double py = x[state::kPy];
  if (out.world.obstacle && out.world.obstacle->touchesDisc(px, py, cfg.vehicleRadius)) {
    out.events.push_back(WorldEvent::Collided);
  } else if (py <= cfg.groundY) {
    const bool onPad = px >= cfg.touchpad.xMin && px <= cfg.touchpad.xMax;
    out.events.push_back(onPad && std::abs(x[state::kVy]) <= cfg.landingSpeed
                             ? WorldEvent::Landed
                             : WorldEvent::Collided);
  } else if (px < cfg.laneBoundaries.front() || px > cfg.laneBoundaries.back() ||
             py > cfg.ceilingY) {
    out.events.push_back(WorldEvent::LeftBounds);
  }
  return out;
}

bool isTerminal(WorldEvent event) noexcept { return event != WorldEvent::ObstacleSpawned; }

Outcome outcomeOf(WorldEvent event) noexcept {
  switch (event) {
    case WorldEvent::Landed:
      return Outcome::Landed;
    case WorldEvent::Collided:
      return Outcome::Collided;
    default:
      return Outcome::Aborted;
  }
}

InputVector preSpawnInput(const PilotPolicy& policy, const WorldConfig& world,
                          const StateVector& x) {
  const double lane = world.laneCenter(world.laneOf(world.startX));
  return {lateralInput(policy, x, lane), policy.kvy * (-policy.descentSpeed - x[state::kVy])};
}

InputVector landingInput(const PilotPolicy& policy, const World& world, const StateVector& x) {
  const auto& cfg = world.config;
  const double px = x[state::kPx];
  const double py = x[state::kPy];
  const double padX = cfg.touchpad.centerX();

  double targetX = padX;
  double vref = -policy.descentSpeed;
  if (world.obstacle) {
    const Rect& o = *world.obstacle;
    const bool above = py > o.yMin - policy.clearance;
    if (above) {
      targetX = pickSide(world, px);
      const bool overlapsColumn =
          px > o.xMin - policy.clearance - cfg.vehicleRadius &&
          px < o.xMax + policy.clearance + cfg.vehicleRadius;
      // Hold altitude over the obstacle column until clear of it sideways.
      if (overlapsColumn && py < o.yMax + 2.0 * policy.clearance + cfg.vehicleRadius) vref = 0.0;
    }
  }
  const double height = py - cfg.groundY;
  if (targetX == padX) {
    const double lateral = std::abs(px - padX);
    // Slow down near the ground, hover until above the pad.
    const double approach = std::clamp(0.5 * height, policy.finalDescent, policy.descentSpeed);
    vref = (lateral > 0.5 * (cfg.touchpad.xMax - cfg.touchpad.xMin) && height < 3.0) ? 0.0
                                                                                     : -approach;
  }
  return {lateralInput(policy, x, targetX), policy.kvy * (vref - x[state::kVy])};
}

Trajectory simulateTrial(const SyntheticPilot& pilot, const WorldConfig& worldConfig,
                         const PlantModel& plant, std::uint64_t seed) {
  const double dt = plant.params.dt;
  World world = makeWorld(worldConfig, seed, dt);
  CounterRng rng(seed, 1);
  const auto windowSteps = static_cast<int>(windowRows(pilot.policy.windowDuration, dt));
  const auto maxSteps = static_cast<int>(std::floor(worldConfig.maxDuration / dt + kTimeEps));

  Trajectory traj;
  traj.dt = dt;
  traj.outcome = Outcome::Aborted;
  StateVector x = worldConfig.startState();
  std::optional<int> spawnStep;
  for (int k = 0;; ++k) {
    const double t = k * dt;
    auto stepped = stepWorld(world, x, t);
    world = std::move(stepped.world);
    bool done = false;
    for (auto e : stepped.events) {
      if (e == WorldEvent::ObstacleSpawned) {
        spawnStep = k;
        traj.spawnTime = t;
      } else {
        traj.outcome = outcomeOf(e);
        done = true;
      }
    }
    if (done || k >= maxSteps) {
      traj.samples.push_back({t, x, InputVector::Zero()});
      break;
    }
    InputVector u;
    if (!spawnStep) {
      u = preSpawnInput(pilot.policy, worldConfig, x);
    } else if (k - *spawnStep < windowSteps) {
      const auto in = conditionOnTime(pilot.behavior, (k - *spawnStep) * dt);
      u = MixtureSampler(in.mixture).draw(rng);
    } else {
      u = landingInput(pilot.policy, world, x);
    }
    u = plant.saturate(u);
    traj.samples.push_back({t, x, u});
    x = step(plant, x, u, false);
  }
  return traj;
}

std::vector<Trajectory> generateSyntheticTrials(const SyntheticPilot& pilot,
                                                const WorldConfig& world,
                                                const PlantModel& plant, std::size_t n,
                                                std::uint64_t seed) {
  if (n < 1) throw ConfigError("need at least one trial");
  if (pilot.behavior.inputDimension() != 2) {
    throw ConfigError("pilot behavior must be a model over [t, alpha, T]");
  }
  world.validate();
  std::vector<Trajectory> out(n);
  const std::uint64_t base = deriveSeed(seed, pilot.noiseSeed);
  for (std::size_t i = 0; i < n; ++i) out[i] = simulateTrial(pilot, world, plant, deriveSeed(base, i));
  return out;
}

Mixture groundTruthBehavior() {
  const GridMoments time = gridMoments(4.5, 0.04);
  Eigen::Matrix2d inputCov = Eigen::Vector2d(0.01 * 0.01, 0.04 * 0.04).asDiagonal();
  return Mixture({
      linearComponent(0.35, time, {-0.03, 0.0}, {0.004, 0.0}, inputCov),
      linearComponent(0.35, time, {0.03, 0.0}, {-0.004, 0.0}, inputCov),
      linearComponent(0.30, time, {0.0, 0.2}, {0.0, -0.04}, inputCov),
  });
}

Mixture initialUncertainty(const StateVector& x0) {
  StateMatrix cov = StateMatrix::Zero();
  cov.diagonal() << 1.5, 1.5, 0.05, 1.0, 2.0, 0.05;
  StateVector m2, m3;
  m2 << 1.0, 1.0, 0.1, 1.0, 1.0, 0.05;
  m3 << -1.0, 1.0, -0.1, -1.0, -1.0, -0.05;
  const double w = 1.0 / 3.0;
  return Mixture({{w, x0, cov}, {w, x0 + m2, cov}, {w, x0 + m3, cov}});
}

StateVector defaultSpawnState() {
  StateVector x0 = StateVector::Zero();
  x0[state::kPy] = 4.0;
  x0[state::kVy] = -1.0;
  return x0;
}

Belief defaultInitialBelief() { return {initialUncertainty(defaultSpawnState()), 0.0, 0}; }

DangerZone defaultDangerZone() { return {-12.0, 12.0, -4.0, 0.0}; }

}  // namespace hilreach
