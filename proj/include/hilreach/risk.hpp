#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hilreach/propagate.hpp"

namespace hilreach {

/// Axis-aligned rectangle in the (p_x, p_y) plane.
struct DangerZone {
  double xMin = 0.0, xMax = 0.0;
  double yMin = 0.0, yMax = 0.0;

  void validate() const;
  bool contains(double x, double y) const noexcept {
    return x >= xMin && x <= xMax && y >= yMin && y <= yMax;
  }
};

// P(zone) for one bivariate normal. The inner (y | x) integral is exact via
// the normal CDF, the outer one uses adaptive Gauss-Kronrod quadrature with an
// absolute tolerance of 1e-10. Zero-variance directions are handled as limits.
double rectangleProbability(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                            const DangerZone& zone);

// Sum over components of weight * P(position marginal in zone), clamped to [0, 1].
double collisionProbability(const Belief& belief, const DangerZone& zone);

struct RiskPoint {
  double t = 0.0;
  double probability = 0.0;
};

std::vector<RiskPoint> riskProfile(const BeliefTrajectory& trajectory, const DangerZone& zone);

}  // namespace hilreach
