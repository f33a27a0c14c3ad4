#include "hilreach/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hilreach/errors.hpp"
#include "hilreach/rng.hpp"

namespace hilreach {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void validateCovariance(const Eigen::MatrixXd& cov, std::size_t index) {
  const double scale = cov.cwiseAbs().maxCoeff();
  const double asymmetry = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (!(asymmetry <= 1e-12 * scale)) {
    throw DataError("component " + std::to_string(index) + ": covariance is not symmetric");
  }
  if (scale == 0.0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -1e-9 * scale) {
    throw NotPositiveDefinite(index, "covariance is not positive semi-definite");
  }
}

}  // namespace

Mixture::Mixture(std::vector<GaussianComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw DataError("mixture needs at least one component");
  dimension_ = static_cast<int>(components_.front().mean.size());
  if (dimension_ < 1) throw DataError("mixture dimension must be positive");

  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    if (c.mean.size() != dimension_ || c.covariance.rows() != dimension_ ||
        c.covariance.cols() != dimension_) {
      throw DataError("component " + std::to_string(i) + ": dimension mismatch");
    }
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      throw DataError("component " + std::to_string(i) + ": weight must be finite and >= 0");
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw DataError("component " + std::to_string(i) + ": non-finite parameters");
    }
    validateCovariance(c.covariance, i);
    total += c.weight;
  }
  if (!(total > 0.0)) throw DataError("mixture weights sum to zero");
  for (auto& c : components_) c.weight /= total;
}

GaussianEvaluator::GaussianEvaluator(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& covariance, std::size_t index)
    : mean_(mean) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(index, "covariance is not positive definite");
  }
  lower_ = llt.matrixL();
  const auto diag = lower_.diagonal();
  if ((diag.array() <= 0.0).any()) {
    throw NotPositiveDefinite(index, "covariance is not positive definite");
  }
  logDet_ = 2.0 * diag.array().log().sum();
  logNormalizer_ = -0.5 * (static_cast<double>(mean.size()) * kLog2Pi + logDet_);
}

double GaussianEvaluator::logPdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd z =
      lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return logNormalizer_ - 0.5 * z.squaredNorm();
}

MixtureEvaluator::MixtureEvaluator(const Mixture& mixture) : dimension_(mixture.dimension()) {
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    const auto& c = mixture[i];
    if (c.weight <= 0.0) continue;
    gaussians_.emplace_back(c.mean, c.covariance, i);
    logWeights_.push_back(std::log(c.weight));
  }
}

double MixtureEvaluator::logDensity(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension_) throw DataError("density: dimension mismatch");
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(gaussians_.size());
  for (std::size_t i = 0; i < gaussians_.size(); ++i) {
    terms[i] = logWeights_[i] + gaussians_[i].logPdf(x);
    best = std::max(best, terms[i]);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

double logDensity(const Mixture& mixture, const Eigen::VectorXd& x) {
  if (x.size() != mixture.dimension()) throw DataError("density: dimension mismatch");
  return MixtureEvaluator(mixture).logDensity(x);
}

double density(const Mixture& mixture, const Eigen::VectorXd& x) {
  return std::exp(logDensity(mixture, x));
}

Moments moments(const Mixture& mixture) {
  const int d = mixture.dimension();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& c : mixture) mean += c.weight * c.mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : mixture) {
    const Eigen::VectorXd diff = c.mean - mean;
    cov += c.weight * (c.covariance + diff * diff.transpose());
  }
  return {std::move(mean), std::move(cov)};
}

Eigen::MatrixXd psdFactor(const Eigen::MatrixXd& covariance) {
  const Eigen::Index d = covariance.rows();
  if (covariance.isZero(0.0)) return Eigen::MatrixXd::Zero(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

MixtureSampler::MixtureSampler(const Mixture& mixture) {
  double running = 0.0;
  for (const auto& c : mixture) {
    running += c.weight;
    cumulative_.push_back(running);
    means_.push_back(c.mean);
    factors_.push_back(psdFactor(c.covariance));
  }
}

std::vector<Eigen::VectorXd> sample(const Mixture& mixture, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample: n must be >= 1");
  MixtureSampler sampler(mixture);
  CounterRng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.draw(rng));
  return out;
}

}  // namespace hilreach
