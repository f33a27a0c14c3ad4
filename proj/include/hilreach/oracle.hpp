#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "hilreach/exec.hpp"
#include "hilreach/plant.hpp"
#include "hilreach/propagate.hpp"
#include "hilreach/regression.hpp"

namespace hilreach {

using Point2 = Eigen::Vector2d;

// Monotone-chain hull: counter-clockwise, collinear points dropped. A single
// distinct point yields one vertex, collinear input its two extremes.
std::vector<Point2> convexHull(std::vector<Point2> points);

double polygonArea(const std::vector<Point2>& polygon);

// True when p is inside or within `tolerance` of a CCW convex polygon.
bool insideConvexPolygon(const std::vector<Point2>& polygon, const Point2& p,
                         double tolerance = 1e-9);

enum class InputMode { UniformBounds, BehaviorModel };

struct McConfig {
  std::size_t samples = 5000;
  int horizonSteps = 100;
  InputMode inputMode = InputMode::BehaviorModel;
  std::uint64_t seed = 0;
  bool saturate = false;
  // Extra steps whose states are kept in McResult::snapshots.
  std::vector<int> snapshotSteps;
};

struct McResult {
  std::vector<StateVector> finalStates;
  std::map<int, std::vector<StateVector>> snapshots;
  std::vector<Point2> convexHull2d;  // hull of the final (p_x, p_y)
  StateVector empiricalMean;
  StateMatrix empiricalCov;          // divisor n - 1 (n for a single sample)
};

/// Forward Monte-Carlo simulation from the initial belief. In behavior mode
/// inputs at step k are drawn from the model conditioned on initial.time + k dt;
/// in uniform mode each channel is drawn independently from its bounds.
McResult runMonteCarlo(const Belief& initial, const PlantModel& plant,
                       const BehaviorModel* model, const McConfig& config,
                       Exec exec = Exec::Parallel);

struct SampleMoments {
  StateVector mean;
  StateMatrix covariance;
};

SampleMoments sampleMoments(const std::vector<StateVector>& states);

std::vector<Point2> positionsOf(const std::vector<StateVector>& states);

}  // namespace hilreach
