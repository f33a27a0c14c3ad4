#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hilreach/exec.hpp"

namespace hilreach {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Finite Gaussian mixture with weights normalized to one.
///
/// Construction validates that every component has the same dimension, a
/// non-negative weight and a symmetric positive semi-definite covariance,
/// then rescales the weights so they sum to one. Values are immutable and
/// safe to share between threads.
class Mixture {
 public:
  explicit Mixture(std::vector<GaussianComponent> components);

  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  const GaussianComponent& operator[](std::size_t i) const { return components_[i]; }
  auto begin() const noexcept { return components_.begin(); }
  auto end() const noexcept { return components_.end(); }

 private:
  std::vector<GaussianComponent> components_;
  int dimension_ = 0;
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Precomputed Cholesky factor of one Gaussian for repeated log-pdf calls.
class GaussianEvaluator {
 public:
  // Throws NotPositiveDefinite tagged with `index` when the factorization fails.
  GaussianEvaluator(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                    std::size_t index = 0);

  double logPdf(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double logDeterminant() const noexcept { return logDet_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd lower_;
  double logDet_ = 0.0;
  double logNormalizer_ = 0.0;
};

/// Log-density evaluator for a whole mixture; zero-weight components are skipped.
class MixtureEvaluator {
 public:
  explicit MixtureEvaluator(const Mixture& mixture);

  double logDensity(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  int dimension() const noexcept { return dimension_; }

 private:
  std::vector<GaussianEvaluator> gaussians_;
  std::vector<double> logWeights_;
  int dimension_ = 0;
};

double density(const Mixture& mixture, const Eigen::VectorXd& x);
double logDensity(const Mixture& mixture, const Eigen::VectorXd& x);

Moments moments(const Mixture& mixture);

// Lower factor L with L L^T = covariance for a PSD matrix. Directions with
// zero variance map to exact zeros, so draws there equal the mean.
Eigen::MatrixXd psdFactor(const Eigen::MatrixXd& covariance);

/// Draws from a mixture: categorical component choice, then mean + L z.
class MixtureSampler {
 public:
  explicit MixtureSampler(const Mixture& mixture);

  template <class Rng>
  Eigen::VectorXd draw(Rng& rng) const {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng) * cumulative_.back();
    std::size_t k = 0;
    while (k + 1 < cumulative_.size() && !(u < cumulative_[k])) ++k;
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(means_[k].size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return means_[k] + factors_[k] * z;
  }

  int dimension() const noexcept { return static_cast<int>(means_.front().size()); }

 private:
  std::vector<double> cumulative_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> factors_;
};

std::vector<Eigen::VectorXd> sample(const Mixture& mixture, std::size_t n, std::uint64_t seed);

struct EmConfig {
  int numComponents = 3;
  int maxIterations = 500;
  double logLikelihoodTolerance = 1e-6;
  // Relative floor: covarianceFloor * (data variance of dimension d) is added
  // to diagonal entry d after every M-step.
  double covarianceFloor = 1e-6;
  std::uint64_t seed = 0;
  // Independent k-means++ seedings; the run with the highest final
  // log-likelihood is returned.
  int initializations = 10;
};

struct EmResult {
  Mixture mixture;
  int iterations = 0;
  double logLikelihood = 0.0;
  bool converged = false;
  // Log-likelihood of the data under the parameters entering each iteration,
  // followed by the final value.
  std::vector<double> history;
  // Iterations in which an empty component was re-seeded.
  std::vector<int> rescues;
};

EmResult fitEm(std::span<const Eigen::VectorXd> data, const EmConfig& config,
               Exec exec = Exec::Parallel);

}  // namespace hilreach
