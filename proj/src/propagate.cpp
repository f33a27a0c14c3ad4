#include "hilreach/propagate.hpp"

#include <cmath>
#include <iostream>

#include "hilreach/errors.hpp"
#include "hilreach/kernels.hpp"

namespace hilreach {

void validateBelief(const Belief& belief) {
  if (belief.mixture.dimension() != 6) {
    throw DataError("belief must be a mixture over the 6-dimensional state");
  }
}

StepResult stepBelief(const Belief& belief, const PlantModel& plant, const BehaviorModel& model,
                      Exec exec) {
  validateBelief(belief);
  if (model.inputDimension() != 2) {
    throw DataError("behavior model must describe the 2-dimensional input [alpha, T]");
  }
  const std::size_t raw = model.size() * belief.mixture.size();
  if (raw > kMaxRawComponents) {
    throw ConfigError("prediction step would create " + std::to_string(raw) +
                      " components; lower maxComponents");
  }

  const InputDistribution input = conditionOnTime(model, belief.time);
  auto comps = kernels::expandComponents(plant, input.mixture, belief.mixture, exec);

  double eta = 0.0;
  for (const auto& c : comps) eta += c.weight;
  if (std::abs(eta - 1.0) > 1e-6) {
    std::cerr << "warning: step " << belief.stepIndex << ": normalization constant " << eta
              << " deviates from 1\n";
  }
  for (auto& c : comps) c.weight /= eta;

  StepDiagnostics diag;
  diag.eta = eta;
  diag.rawComponents = raw;
  diag.keptComponents = raw;
  diag.inputPriorFallback = input.priorFallback;
  return {Belief{Mixture(std::move(comps)), belief.time + plant.params.dt, belief.stepIndex + 1},
          std::move(diag)};
}

BeliefTrajectory predict(const Belief& initial, const PlantModel& plant,
                         const BehaviorModel& model, const PredictConfig& config, Exec exec) {
  if (config.horizonSteps < 0) throw ConfigError("predict: horizonSteps must be >= 0");
  if (config.maxComponents < 1) throw ConfigError("predict: maxComponents must be >= 1");
  validateBelief(initial);

  BeliefTrajectory out;
  out.steps.reserve(static_cast<std::size_t>(config.horizonSteps) + 1);
  out.steps.push_back(initial);
  for (int k = 1; k <= config.horizonSteps; ++k) {
    StepResult r = stepBelief(out.steps.back(), plant, model, exec);
    r.belief.time = initial.time + static_cast<double>(k) * plant.params.dt;
    if (config.reduceEachStep && r.belief.mixture.size() > config.maxComponents) {
      ReductionResult red = reduceMixture(r.belief.mixture, config.maxComponents, exec);
      r.belief.mixture = std::move(red.mixture);
      r.diagnostics.merges = std::move(red.merges);
    }
    r.diagnostics.keptComponents = r.belief.mixture.size();
    out.steps.push_back(std::move(r.belief));
    out.diagnostics.push_back(std::move(r.diagnostics));
  }
  return out;
}

DensityGrid densityGrid(const Belief& belief, const GridAxes& axes, Exec exec) {
  if (axes.nx < 2 || axes.ny < 2) throw ConfigError("densityGrid: nx and ny must be >= 2");
  if (!(axes.xMin < axes.xMax) || !(axes.yMin < axes.yMax)) {
    throw ConfigError("densityGrid: empty grid range");
  }
  if (belief.mixture.dimension() < 2) throw DataError("densityGrid: belief has no position block");

  DensityGrid grid;
  grid.axes = axes;
  std::vector<kernels::PlanarGaussian> planar;
  planar.reserve(belief.mixture.size());
  for (const auto& c : belief.mixture) {
    kernels::PlanarGaussian p{c.weight, c.mean.head<2>(), c.covariance.topLeftCorner<2, 2>()};
    Eigen::LLT<Eigen::Matrix2d> llt(p.covariance);
    if (llt.info() != Eigen::Success || !(p.covariance.determinant() > 0.0)) {
      p.covariance += 1e-12 * Eigen::Matrix2d::Identity();
      grid.regularized = true;
    }
    planar.push_back(p);
  }
  std::vector<double> xs(static_cast<std::size_t>(axes.nx)), ys(static_cast<std::size_t>(axes.ny));
  for (int i = 0; i < axes.nx; ++i) xs[static_cast<std::size_t>(i)] = axes.x(i);
  for (int j = 0; j < axes.ny; ++j) ys[static_cast<std::size_t>(j)] = axes.y(j);
  kernels::gridDensity(planar, xs, ys, grid.values, exec);
  return grid;
}

}  // namespace hilreach
