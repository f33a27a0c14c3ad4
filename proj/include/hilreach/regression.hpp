#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hilreach/mixture.hpp"

namespace hilreach {

/// Per-component blocks of a joint (time, input) Gaussian, in [u; t] order.
struct BehaviorBlock {
  double weight = 0.0;
  Eigen::VectorXd inputMean;       // mu^u
  double timeMean = 0.0;           // mu^t
  Eigen::MatrixXd inputCov;        // Sigma^u
  double timeVar = 0.0;            // Sigma^t
  Eigen::VectorXd crossCov;        // Sigma^{ut}; Sigma^{tu} is its transpose
  Eigen::VectorXd gain;            // Sigma^{ut} / Sigma^t
  Eigen::MatrixXd conditionalCov;  // Sigma^u - Sigma^{ut} Sigma^{tu} / Sigma^t
};

/// Joint mixture over [t - t0, u...] split for time conditioning. Stored
/// files keep time first; the block view keeps input first.
class BehaviorModel {
 public:
  const Mixture& joint() const noexcept { return joint_; }
  const std::vector<BehaviorBlock>& blocks() const noexcept { return blocks_; }
  int inputDimension() const noexcept { return joint_.dimension() - 1; }
  std::size_t size() const noexcept { return blocks_.size(); }

 private:
  friend BehaviorModel splitBlocks(const Mixture& joint);
  explicit BehaviorModel(Mixture joint) : joint_(std::move(joint)) {}

  Mixture joint_;
  std::vector<BehaviorBlock> blocks_;
};

// Throws DataError when the time variance of any component is not positive or
// the cross blocks are not mutually transposed.
BehaviorModel splitBlocks(const Mixture& joint);

struct InputDistribution {
  Mixture mixture;
  double time = 0.0;
  // Every time marginal underflowed; prior weights were used instead.
  bool priorFallback = false;
};

InputDistribution conditionOnTime(const BehaviorModel& model, double t);

struct CurvePoint {
  double t = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

// Mean and per-channel standard deviation of the conditional input mixture on
// the grid t0, t0 + dt, ..., up to t1.
std::vector<CurvePoint> regressionCurve(const BehaviorModel& model, double t0, double t1,
                                        double dt);

}  // namespace hilreach
