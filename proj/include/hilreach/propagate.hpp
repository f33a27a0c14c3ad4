#pragma once

#include <cstddef>
#include <vector>

#include "hilreach/exec.hpp"
#include "hilreach/mixture.hpp"
#include "hilreach/plant.hpp"
#include "hilreach/reduce.hpp"
#include "hilreach/regression.hpp"

namespace hilreach {

/// State distribution at a prediction step; time is measured from the
/// obstacle spawn, matching the behavior model's time axis.
struct Belief {
  Mixture mixture;
  double time = 0.0;
  int stepIndex = 0;
};

// Throws DataError unless the belief is 6-dimensional.
void validateBelief(const Belief& belief);

struct PredictConfig {
  int horizonSteps = 100;
  std::size_t maxComponents = 16;
  bool reduceEachStep = true;
};

struct StepDiagnostics {
  double eta = 1.0;                 // raw weight sum before normalization
  std::size_t rawComponents = 0;    // M * L
  std::size_t keptComponents = 0;   // after reduction
  bool inputPriorFallback = false;
  std::vector<MergeRecord> merges;
};

// Hard cap on M * L before reduction.
inline constexpr std::size_t kMaxRawComponents = 1'000'000;

struct StepResult {
  Belief belief;
  StepDiagnostics diagnostics;
};

/// One prediction step: every (input component i, state component j) pair
/// yields N(A mu_j + B mu_i(t), B S_i B^T + A S_j A^T) with weight
/// w_i(t) w_j / eta, ordered i-major. No reduction is applied here.
StepResult stepBelief(const Belief& belief, const PlantModel& plant, const BehaviorModel& model,
                      Exec exec = Exec::Parallel);

struct BeliefTrajectory {
  std::vector<Belief> steps;  // steps[0] is the initial belief
  std::vector<StepDiagnostics> diagnostics;
};

BeliefTrajectory predict(const Belief& initial, const PlantModel& plant,
                         const BehaviorModel& model, const PredictConfig& config,
                         Exec exec = Exec::Parallel);

struct GridAxes {
  double xMin = 0.0, xMax = 1.0;
  double yMin = 0.0, yMax = 1.0;
  int nx = 2, ny = 2;

  double x(int i) const { return xMin + (xMax - xMin) * i / (nx - 1); }
  double y(int j) const { return yMin + (yMax - yMin) * j / (ny - 1); }
};

struct DensityGrid {
  GridAxes axes;
  std::vector<double> values;  // row-major, index iy * nx + ix
  // Some component had a degenerate position marginal and was regularized.
  bool regularized = false;

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy * axes.nx + ix)]; }
};

/// Density of the (p_x, p_y) marginal of the belief evaluated on the grid.
DensityGrid densityGrid(const Belief& belief, const GridAxes& axes, Exec exec = Exec::Parallel);

}  // namespace hilreach
