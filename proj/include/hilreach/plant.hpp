#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hilreach {

// State ordering: [p_x, p_y, theta_att, v_x, v_y, w]; input ordering: [alpha, T].
using StateVector = Eigen::Matrix<double, 6, 1>;
using InputVector = Eigen::Matrix<double, 2, 1>;
using StateMatrix = Eigen::Matrix<double, 6, 6>;
using InputMatrix = Eigen::Matrix<double, 6, 2>;

namespace state {
inline constexpr int kPx = 0;
inline constexpr int kPy = 1;
inline constexpr int kTheta = 2;
inline constexpr int kVx = 3;
inline constexpr int kVy = 4;
inline constexpr int kOmega = 5;
}  // namespace state

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Physical and controller parameters of the planar multi-rotor. Defaults are
/// the reference simulation values.
struct PlantParams {
  double dt = 0.04;
  double g = 9.8;
  double mass = 0.25;
  double inertiaX = 0.01;
  double k1 = -0.1;
  double k2 = -1.0;
  double k3 = -30.0;
  Bounds alphaBounds{-0.5, 0.5};
  Bounds thrustBounds{-1.7, 1.7};

  // Throws ConfigError when dt < 0, mass/inertia <= 0 or bounds are unordered.
  void validate() const;
};

struct PlantModel {
  StateMatrix A;
  InputMatrix B;
  PlantParams params;

  InputVector saturate(const InputVector& u) const;
};

/// A = I_6 + S dt and B = R dt for the structure matrices S, R of the
/// linearized planar multi-rotor.
PlantModel buildPlant(const PlantParams& params);

// x_{k+1} = A x_k + B u_k; with `saturate` the input is clamped first.
StateVector step(const PlantModel& plant, const StateVector& x, const InputVector& u,
                 bool saturate);

// Returns x0 followed by one state per input.
std::vector<StateVector> rollout(const PlantModel& plant, const StateVector& x0,
                                 std::span<const InputVector> inputs, bool saturate);

// Number of whole plant steps in `seconds` (rounded down, tolerant to 1e-9 s).
int stepsFor(double seconds, double dt);

}  // namespace hilreach
