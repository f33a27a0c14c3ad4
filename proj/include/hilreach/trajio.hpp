#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hilreach/errors.hpp"
#include "hilreach/plant.hpp"

namespace hilreach {

enum class Outcome { Landed, Collided, Aborted };

std::string_view toString(Outcome outcome);
Outcome parseOutcome(std::string_view text);

struct TrajectorySample {
  double t = 0.0;
  StateVector state = StateVector::Zero();
  InputVector input = InputVector::Zero();
};

/// One piloting trial sampled every dt seconds. spawnTime is the instant the
/// obstacle appeared (absent when the trial ended before any spawn).
struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::optional<double> spawnTime;
  Outcome outcome = Outcome::Aborted;
  double dt = 0.04;

  // Throws TrajectoryFormatError on non-monotonic or non-uniform time,
  // non-finite fields or a spawn time that is not a sample timestamp.
  void validate() const;
  std::optional<std::size_t> spawnIndex() const;
};

class TrajectoryFormatError : public DataError {
 public:
  enum class Kind {
    MalformedHeader,
    MalformedRow,
    NonFiniteField,
    NonMonotonicTime,
    NonUniformDt,
    BadSidecar,
    SpawnMismatch,
    Empty,
  };

  TrajectoryFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Rows [t - t0, alpha, T] for the window that starts at the spawn.
struct TrainingWindow {
  std::vector<Eigen::Vector3d> rows;
  double duration = 0.0;
};

class WindowRejected : public DataError {
 public:
  using DataError::DataError;
};

// Throws WindowRejected for trials that did not land, have no spawn, or end
// before spawnTime + duration.
TrainingWindow extractWindow(const Trajectory& trajectory, double duration);

// Number of rows a window of `duration` seconds holds at spacing dt.
std::size_t windowRows(double duration, double dt);

std::vector<Eigen::VectorXd> concatenateWindows(const std::vector<TrainingWindow>& windows);

inline constexpr std::string_view kTrajectoryHeader = "t,px,py,theta,vx,vy,w,alpha,thrust";

std::string trajectoryCsv(const Trajectory& trajectory);
std::string trajectorySidecar(const Trajectory& trajectory);
Trajectory parseTrajectory(std::string_view csv, std::string_view sidecarJson);

// `csvPath` names the CSV; the sidecar sits next to it with a .json extension.
void saveTrajectory(const Trajectory& trajectory, const std::filesystem::path& csvPath);
Trajectory loadTrajectory(const std::filesystem::path& csvPath);

std::filesystem::path trialPath(const std::filesystem::path& dir, std::size_t index);
// trial_*.csv files in `dir`, sorted by name.
std::vector<std::filesystem::path> listTrials(const std::filesystem::path& dir);

}  // namespace hilreach
