#include "hilreach/oracle.hpp"

#include <algorithm>

#include "hilreach/errors.hpp"
#include "hilreach/kernels.hpp"

namespace hilreach {

SampleMoments sampleMoments(const std::vector<StateVector>& states) {
  if (states.empty()) throw DataError("sampleMoments: no samples");
  SampleMoments m;
  m.mean.setZero();
  for (const auto& s : states) m.mean += s;
  m.mean /= static_cast<double>(states.size());
  m.covariance.setZero();
  for (const auto& s : states) {
    const StateVector r = s - m.mean;
    m.covariance += r * r.transpose();
  }
  const double divisor = states.size() > 1 ? static_cast<double>(states.size() - 1) : 1.0;
  m.covariance /= divisor;
  return m;
}

std::vector<Point2> positionsOf(const std::vector<StateVector>& states) {
  std::vector<Point2> out;
  out.reserve(states.size());
  for (const auto& s : states) out.emplace_back(s[state::kPx], s[state::kPy]);
  return out;
}

McResult runMonteCarlo(const Belief& initial, const PlantModel& plant, const BehaviorModel* model,
                       const McConfig& config, Exec exec) {
  validateBelief(initial);
  if (config.samples < 1) throw ConfigError("Monte-Carlo needs at least one sample");
  if (config.horizonSteps < 0) throw ConfigError("Monte-Carlo horizon must be >= 0");
  const bool uniform = config.inputMode == InputMode::UniformBounds;
  if (!uniform && model == nullptr) {
    throw ConfigError("behavior-model Monte-Carlo requires a behavior model");
  }

  const MixtureSampler initialSampler(initial.mixture);
  std::vector<MixtureSampler> inputSamplers;
  if (!uniform) {
    if (model->inputDimension() != 2) throw DataError("behavior model input must be 2-dimensional");
    inputSamplers.reserve(static_cast<std::size_t>(config.horizonSteps));
    for (int k = 0; k < config.horizonSteps; ++k) {
      const double t = initial.time + static_cast<double>(k) * plant.params.dt;
      inputSamplers.emplace_back(conditionOnTime(*model, t).mixture);
    }
  }

  std::vector<int> steps;
  for (int s : config.snapshotSteps) {
    if (s < 0 || s > config.horizonSteps) throw ConfigError("snapshot step outside the horizon");
    if (s != config.horizonSteps) steps.push_back(s);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  steps.push_back(config.horizonSteps);

  kernels::PathSpec spec;
  spec.plant = &plant;
  spec.initial = &initialSampler;
  spec.inputs = inputSamplers;
  spec.uniformInputs = uniform;
  spec.saturate = uniform || config.saturate;
  spec.horizon = config.horizonSteps;
  spec.seed = config.seed;

  std::vector<std::vector<StateVector>> snaps;
  kernels::simulatePaths(spec, config.samples, steps, snaps, exec);

  McResult result;
  for (std::size_t j = 0; j + 1 < steps.size(); ++j) result.snapshots[steps[j]] = std::move(snaps[j]);
  result.finalStates = std::move(snaps.back());
  for (int s : config.snapshotSteps) {
    if (s == config.horizonSteps) result.snapshots[s] = result.finalStates;
  }
  result.convexHull2d = convexHull(positionsOf(result.finalStates));
  const auto m = sampleMoments(result.finalStates);
  result.empiricalMean = m.mean;
  result.empiricalCov = m.covariance;
  return result;
}

}  // namespace hilreach
