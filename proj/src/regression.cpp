#include "hilreach/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hilreach/errors.hpp"

namespace hilreach {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
// Below this log-density every weighted time marginal is zero in double
// precision, so the density ratio is 0/0.
const double kLogUnderflow = std::log(std::numeric_limits<double>::denorm_min());

}  // namespace

BehaviorModel splitBlocks(const Mixture& joint) {
  if (joint.dimension() < 2) {
    throw DataError("behavior model needs a time axis and at least one input");
  }
  const int du = joint.dimension() - 1;
  BehaviorModel model(joint);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const auto& c = joint[i];
    BehaviorBlock b;
    b.weight = c.weight;
    b.timeMean = c.mean[0];
    b.inputMean = c.mean.tail(du);
    b.timeVar = c.covariance(0, 0);
    b.inputCov = c.covariance.bottomRightCorner(du, du);
    b.crossCov = c.covariance.block(1, 0, du, 1);
    const Eigen::VectorXd crossT = c.covariance.block(0, 1, 1, du).transpose();
    const double scale = std::max(1.0, c.covariance.cwiseAbs().maxCoeff());
    if ((b.crossCov - crossT).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw DataError("component " + std::to_string(i) + ": cross-covariance blocks differ");
    }
    if (!(b.timeVar > 0.0)) {
      throw DataError("component " + std::to_string(i) +
                      ": time variance must be positive for conditioning");
    }
    b.gain = b.crossCov / b.timeVar;
    Eigen::MatrixXd schur = b.inputCov - b.gain * b.crossCov.transpose();
    b.conditionalCov = 0.5 * (schur + schur.transpose());
    // Eigenvalues within round-off of zero are set to exactly zero, so an input
    // that is a deterministic function of time samples without jitter.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.conditionalCov);
    const double tol = 1e-12 * std::max(b.inputCov.cwiseAbs().maxCoeff(), 1e-300);
    if (eig.eigenvalues().minCoeff() < -tol) {
      throw NotPositiveDefinite(i, "conditional input covariance is indefinite");
    }
    if (eig.eigenvalues().minCoeff() <= tol) {
      const Eigen::VectorXd clipped = eig.eigenvalues().unaryExpr([tol](double v) { return v <= tol ? 0.0 : v; });
      b.conditionalCov = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
      b.conditionalCov = 0.5 * (b.conditionalCov + b.conditionalCov.transpose()).eval();
    }
    model.blocks_.push_back(std::move(b));
  }
  return model;
}

InputDistribution conditionOnTime(const BehaviorModel& model, double t) {
  if (!std::isfinite(t)) throw ConfigError("conditionOnTime: time must be finite");
  const auto& blocks = model.blocks();

  std::vector<double> logw(blocks.size(), -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.weight <= 0.0) continue;
    const double r = t - b.timeMean;
    logw[i] = std::log(b.weight) - 0.5 * (kLog2Pi + std::log(b.timeVar) + r * r / b.timeVar);
    best = std::max(best, logw[i]);
  }

  bool fallback = false;
  std::vector<GaussianComponent> comps;
  comps.reserve(blocks.size());
  if (best > kLogUnderflow) {
    double sum = 0.0;
    for (double lw : logw) sum += std::exp(lw - best);
    const double lse = best + std::log(sum);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      comps.push_back({std::exp(logw[i] - lse), b.inputMean + b.gain * (t - b.timeMean),
                       b.conditionalCov});
    }
  } else {
    fallback = true;
    for (const auto& b : blocks) {
      comps.push_back({b.weight, b.inputMean + b.gain * (t - b.timeMean), b.conditionalCov});
    }
  }
  return {Mixture(std::move(comps)), t, fallback};
}

std::vector<CurvePoint> regressionCurve(const BehaviorModel& model, double t0, double t1,
                                        double dt) {
  if (!(dt > 0.0)) throw ConfigError("regressionCurve: dt must be > 0");
  if (!(t0 <= t1)) throw ConfigError("regressionCurve: t0 must not exceed t1");
  const auto count = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    const auto m = moments(conditionOnTime(model, t).mixture);
    curve.push_back({t, m.mean, m.covariance.diagonal().cwiseMax(0.0).cwiseSqrt()});
  }
  return curve;
}

}  // namespace hilreach
