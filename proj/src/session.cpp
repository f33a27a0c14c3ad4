#include "hilreach/session.hpp"

#include <algorithm>
#include <cstdlib>

#include "hilreach/errors.hpp"
#include "hilreach/risk.hpp"

namespace hilreach {

std::string_view toString(Phase phase) {
  switch (phase) {
    case Phase::PreSpawn:
      return "preSpawn";
    case Phase::PostSpawn:
      return "postSpawn";
    case Phase::Ended:
      return "ended";
  }
  return "ended";
}

Overlay computeOverlay(const BehaviorModel& model, const PlantModel& plant, const World& world,
                       const StateVector& state, double elapsed, int tick,
                       const OverlayConfig& config) {
  Belief point{Mixture({{1.0, state, StateMatrix::Zero()}}), elapsed, 0};
  PredictConfig pc;
  pc.horizonSteps = stepsFor(config.horizon, plant.params.dt);
  pc.maxComponents = config.maxComponents;
  const auto traj = predict(point, plant, model, pc, Exec::Serial);
  const Belief& last = traj.steps.back();

  const auto& cfg = world.config;
  GridAxes axes{cfg.laneBoundaries.front(), cfg.laneBoundaries.back(), cfg.groundY, cfg.ceilingY,
                config.nx, config.ny};
  Overlay out;
  out.computedAtTick = tick;
  out.horizon = pc.horizonSteps * plant.params.dt;
  out.grid = densityGrid(last, axes, Exec::Serial);
  if (world.obstacle) {
    const Rect& o = *world.obstacle;
    const double r = cfg.vehicleRadius;
    out.risk = collisionProbability(last, {o.xMin - r, o.xMax + r, o.yMin - r, o.yMax + r});
  }
  return out;
}

Session::Session(std::string id, const WorldConfig& world, const PlantParams& plant,
                 std::uint64_t seed, std::shared_ptr<const BehaviorModel> overlayModel,
                 OverlayConfig overlay)
    : id_(std::move(id)),
      plant_(buildPlant(plant)),
      world_(makeWorld(world, seed, plant.dt)),
      seed_(seed),
      model_(std::move(overlayModel)),
      overlay_(overlay),
      state_(world.startState()) {
  if (overlay_.cadenceTicks < 1) throw ConfigError("overlay cadence must be >= 1 tick");
  recording_.dt = plant_.params.dt;
  recording_.samples.push_back({0.0, state_, InputVector::Zero()});
  auto stepped = stepWorld(world_, state_, 0.0);
  world_ = std::move(stepped.world);
  for (auto e : stepped.events) {
    if (e == WorldEvent::ObstacleSpawned) {
      spawnTick_ = 0;
      recording_.spawnTime = 0.0;
      phase_ = Phase::PostSpawn;
    }
  }
}

TelemetryFrame Session::tick(const InputVector& u) {
  TelemetryFrame frame;
  if (phase_ == Phase::Ended) {
    frame.tick = clock_;
    frame.t = recording_.samples.back().t;
    frame.state = state_;
    frame.phase = phase_;
    frame.terminal = true;
    return frame;
  }
  const InputVector applied = plant_.saturate(u);
  recording_.samples.back().input = applied;
  state_ = step(plant_, state_, applied, false);
  ++clock_;
  const double t = clock_ * plant_.params.dt;
  recording_.samples.push_back({t, state_, InputVector::Zero()});

  auto stepped = stepWorld(world_, state_, t);
  world_ = std::move(stepped.world);
  for (auto e : stepped.events) {
    if (e == WorldEvent::ObstacleSpawned) {
      spawnTick_ = clock_;
      recording_.spawnTime = t;
      phase_ = Phase::PostSpawn;
    } else {
      recording_.outcome = outcomeOf(e);
      phase_ = Phase::Ended;
    }
  }

  frame.tick = clock_;
  frame.t = t;
  frame.state = state_;
  frame.input = applied;
  frame.events = std::move(stepped.events);
  frame.phase = phase_;
  frame.terminal = phase_ == Phase::Ended;
  frame.overlayDue = model_ && phase_ == Phase::PostSpawn &&
                     (clock_ - *spawnTick_) % overlay_.cadenceTicks == 0;
  return frame;
}

Trajectory Session::recording() const { return recording_; }

double Session::elapsedSinceSpawn() const {
  return spawnTick_ ? (clock_ - *spawnTick_) * plant_.params.dt : 0.0;
}

void Session::end() {
  if (phase_ != Phase::Ended) {
    recording_.outcome = Outcome::Aborted;
    phase_ = Phase::Ended;
  }
}

TrialStore::TrialStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  for (const auto& p : listTrials(dir_)) {
    const std::string stem = p.stem().string();
    char* end = nullptr;
    const unsigned long idx = std::strtoul(stem.c_str() + 6, &end, 10);
    if (end && *end == '\0') next_ = std::max<std::size_t>(next_, idx + 1);
  }
}

std::filesystem::path TrialStore::persist(const Trajectory& trajectory) {
  std::lock_guard lock(mutex_);
  const auto path = trialPath(dir_, next_++);
  saveTrajectory(trajectory, path);
  return path;
}

}  // namespace hilreach
