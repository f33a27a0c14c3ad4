#include "hilreach/plant.hpp"

#include <cmath>

#include "hilreach/errors.hpp"

namespace hilreach {

void PlantParams::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("plant: dt must be >= 0");
  if (!(mass > 0.0)) throw ConfigError("plant: mass must be > 0");
  if (!(inertiaX > 0.0)) throw ConfigError("plant: inertiaX must be > 0");
  if (!(alphaBounds.lo <= alphaBounds.hi)) throw ConfigError("plant: alpha bounds unordered");
  if (!(thrustBounds.lo <= thrustBounds.hi)) throw ConfigError("plant: thrust bounds unordered");
}

InputVector PlantModel::saturate(const InputVector& u) const {
  return {params.alphaBounds.clamp(u[0]), params.thrustBounds.clamp(u[1])};
}

PlantModel buildPlant(const PlantParams& params) {
  params.validate();
  const double dt = params.dt;

  StateMatrix S = StateMatrix::Zero();
  S(0, 3) = 1.0;
  S(1, 4) = 1.0;
  S(2, 5) = 1.0;
  S(3, 2) = params.g;
  S(4, 4) = params.k1;
  S(5, 2) = params.k2;
  S(5, 5) = params.k3;

  InputMatrix R = InputMatrix::Zero();
  R(4, 1) = 1.0 / params.mass;
  R(5, 0) = 1.0 / params.inertiaX;

  PlantModel pm;
  pm.A = StateMatrix::Identity() + S * dt;
  pm.B = R * dt;
  pm.params = params;
  return pm;
}

StateVector step(const PlantModel& plant, const StateVector& x, const InputVector& u,
                 bool saturate) {
  if (!x.allFinite() || !u.allFinite()) throw DataError("plant step: non-finite state or input");
  const InputVector applied = saturate ? plant.saturate(u) : u;
  const StateVector ax = plant.A * x;
  const StateVector bu = plant.B * applied;
  return ax + bu;
}

std::vector<StateVector> rollout(const PlantModel& plant, const StateVector& x0,
                                 std::span<const InputVector> inputs, bool saturate) {
  std::vector<StateVector> out;
  out.reserve(inputs.size() + 1);
  out.push_back(x0);
  for (const auto& u : inputs) out.push_back(step(plant, out.back(), u, saturate));
  return out;
}

int stepsFor(double seconds, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step count needs dt > 0");
  if (!(seconds >= 0.0)) throw ConfigError("step count needs a non-negative duration");
  return static_cast<int>(std::floor(seconds / dt + 1e-9));
}

}  // namespace hilreach
