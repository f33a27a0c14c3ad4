#include "hilreach/reduce.hpp"

#include <cmath>
#include <limits>

#include "hilreach/errors.hpp"
#include "hilreach/kernels.hpp"

namespace hilreach {
namespace {

constexpr double kScoringRidge = 1e-12;

double strictLogDet(const Eigen::MatrixXd& cov, std::size_t index) {
  const double v = kernels::regularizedLogDet(cov, 0.0);
  if (!std::isfinite(v)) throw NotPositiveDefinite(index, "covariance is not positive definite");
  return v;
}

}  // namespace

GaussianComponent mergePair(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.mean.size() != b.mean.size()) throw DataError("mergePair: dimension mismatch");
  const double w = a.weight + b.weight;
  if (!(w > 0.0)) throw ConfigError("mergePair: combined weight is zero");
  const double wa = a.weight / w;
  const double wb = b.weight / w;
  const Eigen::VectorXd diff = a.mean - b.mean;
  GaussianComponent m;
  m.weight = w;
  m.mean = wa * a.mean + wb * b.mean;
  const Eigen::MatrixXd cov =
      wa * a.covariance + wb * b.covariance + (wa * wb) * (diff * diff.transpose());
  m.covariance = 0.5 * (cov + cov.transpose());
  return m;
}

double klUpperBound(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.mean.size() != b.mean.size()) throw DataError("klUpperBound: dimension mismatch");
  const double logDetA = strictLogDet(a.covariance, 0);
  const double logDetB = strictLogDet(b.covariance, 1);
  return kernels::pairScore(a, logDetA, b, logDetB, 0.0);
}

ReductionResult reduceMixture(const Mixture& mixture, std::size_t target, Exec exec) {
  if (target < 1) throw ConfigError("reduceMixture: target must be >= 1");
  const std::size_t n = mixture.size();
  if (n <= target) return {mixture, {}, std::numeric_limits<double>::infinity()};

  // Slots keep their original positions; merged components overwrite the
  // lower slot and the higher one is retired. Current indices are the ranks
  // of active slots, so slot order reproduces lexicographic tie-breaking.
  std::vector<GaussianComponent> slots(mixture.components());
  std::vector<char> active(n, 1);
  std::vector<double> logDets(n);
  for (std::size_t i = 0; i < n; ++i) {
    logDets[i] = kernels::regularizedLogDet(slots[i].covariance, kScoringRidge);
  }
  Eigen::MatrixXd scores = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n),
                                                     std::numeric_limits<double>::infinity());
  kernels::pairScores(slots, logDets, active, kScoringRidge, scores, exec);
  double minScored = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) minScored = std::min(minScored, scores(i, j));
  }

  auto rankOf = [&](std::size_t slot) {
    std::size_t r = 0;
    for (std::size_t s = 0; s < slot; ++s) r += active[s] ? 1 : 0;
    return r;
  };

  std::vector<MergeRecord> merges;
  std::size_t remaining = n;
  while (remaining > target) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (!found || scores(i, j) < best) {
          best = scores(i, j);
          bi = i;
          bj = j;
          found = true;
        }
      }
    }

    MergeRecord rec{rankOf(bi), rankOf(bj), best, rankOf(bi)};
    if (slots[bi].weight + slots[bj].weight > 0.0) {
      slots[bi] = mergePair(slots[bi], slots[bj]);
    }  // two zero-weight components: keep the lower one as is
    active[bj] = 0;
    --remaining;
    merges.push_back(rec);

    logDets[bi] = kernels::regularizedLogDet(slots[bi].covariance, kScoringRidge);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi) continue;
      const std::size_t lo = std::min(k, bi), hi = std::max(k, bi);
      scores(lo, hi) = kernels::pairScore(slots[lo], logDets[lo], slots[hi], logDets[hi],
                                          kScoringRidge);
      minScored = std::min(minScored, scores(lo, hi));
    }
  }

  std::vector<GaussianComponent> kept;
  kept.reserve(remaining);
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) kept.push_back(std::move(slots[i]));
  }
  return {Mixture(std::move(kept)), std::move(merges), minScored};
}

}  // namespace hilreach
