#pragma once

// Data-parallel inner loops shared by the modules. Every kernel has a serial
// reference path and an OpenMP path selected by Exec; the OpenMP path only
// partitions independent iterations and writes to disjoint outputs, so both
// paths return bit-identical results.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hilreach/exec.hpp"
#include "hilreach/mixture.hpp"
#include "hilreach/plant.hpp"

namespace hilreach::kernels {

// E-step: logJoint(n, k) = log w_k + log N(x_n; mu_k, S_k) for the columns of
// `data` (d x n); logNorm(n) is the log-sum-exp over k and `resp` holds the
// normalized responsibilities (n x K).
void responsibilities(std::span<const GaussianEvaluator> gaussians,
                      std::span<const double> logWeights, const Eigen::MatrixXd& data,
                      Eigen::MatrixXd& resp, Eigen::VectorXd& logNorm, Exec exec);

// log det of (S + ridge I) via Cholesky; +inf marks a failed factorization.
double regularizedLogDet(const Eigen::MatrixXd& covariance, double ridge);

// K-L upper bound of merging a and b using precomputed log-determinants of
// their (regularized) covariances.
double pairScore(const GaussianComponent& a, double logDetA, const GaussianComponent& b,
                 double logDetB, double ridge);

// Fills scores(i, j) for i < j over the active slots; other entries untouched.
void pairScores(std::span<const GaussianComponent> comps, std::span<const double> logDets,
                std::span<const char> active, double ridge, Eigen::MatrixXd& scores, Exec exec);

// Pushes an L-component state mixture through x' = A x + B u with an
// M-component input mixture; output component (i, j) lands at i * L + j with
// raw weight wInput_i * wState_j.
std::vector<GaussianComponent> expandComponents(const PlantModel& plant,
                                                const Mixture& inputs, const Mixture& state,
                                                Exec exec);

struct PlanarGaussian {
  double weight = 0.0;
  Eigen::Vector2d mean;
  Eigen::Matrix2d covariance;
};

// Mixture density of planar Gaussians on the grid xs x ys, row-major with y
// as the slow axis. Covariances must be positive definite.
void gridDensity(std::span<const PlanarGaussian> comps, std::span<const double> xs,
                 std::span<const double> ys, std::vector<double>& out, Exec exec);

struct PathSpec {
  const PlantModel* plant = nullptr;
  const MixtureSampler* initial = nullptr;
  // One sampler per step; ignored when `uniformInputs` is set.
  std::span<const MixtureSampler> inputs;
  bool uniformInputs = false;
  bool saturate = false;
  int horizon = 0;
  std::uint64_t seed = 0;
};

// Monte-Carlo paths. Sample s uses its own counter-based stream (seed, s),
// draws the initial state first, then one input per step. `snapshotSteps`
// (ascending, each in [0, horizon]) selects states to keep;
// snapshots[j][s] is sample s at snapshotSteps[j].
void simulatePaths(const PathSpec& spec, std::size_t samples, std::span<const int> snapshotSteps,
                   std::vector<std::vector<StateVector>>& snapshots, Exec exec);

}  // namespace hilreach::kernels
