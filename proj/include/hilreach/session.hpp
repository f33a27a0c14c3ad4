#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hilreach/plant.hpp"
#include "hilreach/propagate.hpp"
#include "hilreach/regression.hpp"
#include "hilreach/scenario.hpp"
#include "hilreach/trajio.hpp"

namespace hilreach {

enum class Phase { PreSpawn, PostSpawn, Ended };

std::string_view toString(Phase phase);

struct OverlayConfig {
  double horizon = 2.0;  // s
  std::size_t maxComponents = 8;
  int cadenceTicks = 25;
  int nx = 49;
  int ny = 81;
};

struct Overlay {
  int computedAtTick = 0;
  double horizon = 0.0;
  DensityGrid grid;
  // Probability that the predicted position at the horizon overlaps the
  // obstacle (inflated by the vehicle radius).
  double risk = 0.0;
};

// Prediction from the point belief at `state`, `elapsed` seconds after the
// spawn. Grid axes cover the world's lanes from ground to ceiling.
Overlay computeOverlay(const BehaviorModel& model, const PlantModel& plant, const World& world,
                       const StateVector& state, double elapsed, int tick,
                       const OverlayConfig& config);

struct TelemetryFrame {
  int tick = 0;
  double t = 0.0;
  StateVector state = StateVector::Zero();
  InputVector input = InputVector::Zero();  // saturated input applied this tick
  std::vector<WorldEvent> events;
  Phase phase = Phase::PreSpawn;
  bool terminal = false;
  // Set on ticks where a new overlay should be computed from `state`.
  bool overlayDue = false;
  std::optional<Overlay> overlay;
};

/// One live piloting run. The clock only advances through tick(), so the
/// recording depends on the input sequence alone, never on wall time.
class Session {
 public:
  Session(std::string id, const WorldConfig& world, const PlantParams& plant, std::uint64_t seed,
          std::shared_ptr<const BehaviorModel> overlayModel = nullptr,
          OverlayConfig overlay = {});

  // Saturates u, steps plant and world, extends the recording. On an ended
  // session nothing changes and the frame is flagged terminal.
  TelemetryFrame tick(const InputVector& u);

  const std::string& id() const noexcept { return id_; }
  Phase phase() const noexcept { return phase_; }
  int clock() const noexcept { return clock_; }
  const StateVector& state() const noexcept { return state_; }
  const World& world() const noexcept { return world_; }
  const PlantModel& plant() const noexcept { return plant_; }
  const std::shared_ptr<const BehaviorModel>& overlayModel() const noexcept { return model_; }
  const OverlayConfig& overlayConfig() const noexcept { return overlay_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Recording so far; an unfinished session is labelled aborted.
  Trajectory recording() const;
  double elapsedSinceSpawn() const;

  // Ends the session (aborted unless an outcome event already ended it).
  void end();

 private:
  std::string id_;
  PlantModel plant_;
  World world_;
  std::uint64_t seed_;
  std::shared_ptr<const BehaviorModel> model_;
  OverlayConfig overlay_;
  StateVector state_;
  int clock_ = 0;
  Phase phase_ = Phase::PreSpawn;
  Trajectory recording_;
  std::optional<int> spawnTick_;
};

/// Persists finished trials as trials/trial_NNN.csv(.json), numbering after
/// the highest existing index. Safe for concurrent use.
class TrialStore {
 public:
  explicit TrialStore(std::filesystem::path dir);
  std::filesystem::path persist(const Trajectory& trajectory);
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::size_t next_ = 0;
};

}  // namespace hilreach
