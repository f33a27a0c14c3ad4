#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hilreach/errors.hpp"
#include "hilreach/kernels.hpp"
#include "hilreach/mixture.hpp"
#include "hilreach/rng.hpp"

namespace hilreach {
namespace {

// Responsibility mass below which a component counts as empty.
constexpr double kEmptyMass = 1e-8;

struct Params {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
};

struct DataStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd floor;
};

// Covariance used for components that have fewer than two points behind them.
Eigen::MatrixXd fallbackCovariance(const DataStats& stats, int K) {
  Eigen::VectorXd diag = stats.variance / static_cast<double>(K) / static_cast<double>(K);
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) diag[i] = 1.0;
  }
  return Eigen::MatrixXd(diag.asDiagonal()) + Eigen::MatrixXd(stats.floor.asDiagonal());
}

Params kmeansPlusPlus(const Eigen::MatrixXd& X, int K, std::uint64_t seed, const DataStats& stats) {
  const Eigen::Index n = X.cols();
  Eigen::VectorXd scale = stats.variance.cwiseSqrt();
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (!(scale[i] > 0.0)) scale[i] = 1.0;
  }
  const Eigen::MatrixXd Z = (X.colwise() - stats.mean).array().colwise() / scale.array();

  CounterRng rng(seed);
  std::vector<Eigen::Index> centers;
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  auto pick = [&](Eigen::Index idx) {
    centers.push_back(idx);
    chosen[static_cast<std::size_t>(idx)] = 1;
  };
  pick(std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(rng.uniform01() * n)));

  Eigen::VectorXd d2 = (Z.colwise() - Z.col(centers[0])).colwise().squaredNorm().transpose();
  while (static_cast<int>(centers.size()) < K) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += d2[i];
    Eigen::Index next = -1;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double run = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += d2[i];
        if (d2[i] > 0.0 && run > r) {
          next = i;
          break;
        }
      }
      if (next < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[i] > 0.0) {
            next = i;
            break;
          }
        }
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
      }
    }
    pick(next);
    d2 = d2.cwiseMin((Z.colwise() - Z.col(next)).colwise().squaredNorm().transpose());
  }

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(K));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double bestDist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const double dist = (Z.col(i) - Z.col(centers[static_cast<std::size_t>(k)])).squaredNorm();
      if (dist < bestDist) {
        bestDist = dist;
        best = k;
      }
    }
    members[static_cast<std::size_t>(best)].push_back(i);
  }

  Params p;
  const Eigen::MatrixXd floorDiag = stats.floor.asDiagonal();
  for (int k = 0; k < K; ++k) {
    const auto& m = members[static_cast<std::size_t>(k)];
    if (m.size() < 2) {
      p.weights.push_back(std::max<double>(1.0, static_cast<double>(m.size())) /
                          static_cast<double>(n));
      p.means.push_back(X.col(centers[static_cast<std::size_t>(k)]));
      p.covs.push_back(fallbackCovariance(stats, K));
      continue;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(X.rows());
    for (auto i : m) mean += X.col(i);
    mean /= static_cast<double>(m.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(X.rows(), X.rows());
    for (auto i : m) {
      const Eigen::VectorXd r = X.col(i) - mean;
      cov += r * r.transpose();
    }
    cov /= static_cast<double>(m.size());
    p.weights.push_back(static_cast<double>(m.size()) / static_cast<double>(n));
    p.means.push_back(std::move(mean));
    p.covs.push_back(cov + floorDiag);
  }
  const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= total;
  return p;
}

// Builds evaluators, inflating the diagonal of any covariance that fails to
// factor. Singular covariances are never fatal.
std::vector<GaussianEvaluator> makeEvaluators(Params& p) {
  std::vector<GaussianEvaluator> out;
  out.reserve(p.covs.size());
  for (std::size_t k = 0; k < p.covs.size(); ++k) {
    auto& cov = p.covs[k];
    const double base = std::max(1e-12, 1e-9 * cov.diagonal().cwiseAbs().mean());
    for (int attempt = 0;; ++attempt) {
      try {
        out.emplace_back(p.means[k], cov, k);
        break;
      } catch (const NotPositiveDefinite&) {
        if (attempt >= 30) throw;
        cov.diagonal().array() += base * std::pow(10.0, attempt);
      }
    }
  }
  return out;
}

struct Evaluation {
  Eigen::MatrixXd resp;
  Eigen::VectorXd logNorm;
  double logLikelihood = 0.0;
};

Evaluation evaluate(Params& p, const Eigen::MatrixXd& X, Exec exec) {
  const auto gaussians = makeEvaluators(p);
  std::vector<double> logWeights;
  logWeights.reserve(p.weights.size());
  for (double w : p.weights) {
    logWeights.push_back(w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity());
  }
  Evaluation e;
  kernels::responsibilities(gaussians, logWeights, X, e.resp, e.logNorm, exec);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < e.logNorm.size(); ++i) ll += e.logNorm[i];
  e.logLikelihood = ll;
  return e;
}

// M-step. Returns true when an empty component had to be re-seeded.
bool maximize(Params& p, const Eigen::MatrixXd& X, const Evaluation& e, const DataStats& stats) {
  const Eigen::Index n = X.cols();
  const auto K = static_cast<int>(p.weights.size());
  const Eigen::MatrixXd floorDiag = stats.floor.asDiagonal();
  std::vector<int> empty;
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd r = e.resp.col(k);
    double mass = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) mass += r[i];
    if (mass < kEmptyMass) {
      empty.push_back(k);
      continue;
    }
    p.weights[static_cast<std::size_t>(k)] = mass / static_cast<double>(n);
    Eigen::VectorXd mean = (X * r) / mass;
    const Eigen::MatrixXd centered = X.colwise() - mean;
    Eigen::MatrixXd cov = (centered * r.asDiagonal()) * centered.transpose() / mass;
    cov = 0.5 * (cov + cov.transpose()) + floorDiag;
    p.means[static_cast<std::size_t>(k)] = std::move(mean);
    p.covs[static_cast<std::size_t>(k)] = std::move(cov);
  }
  if (!empty.empty()) {
    // Re-seed at the worst-explained data points, most surprising first.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return e.logNorm[a] < e.logNorm[b];
    });
    for (std::size_t j = 0; j < empty.size(); ++j) {
      const auto k = static_cast<std::size_t>(empty[j]);
      p.weights[k] = 1.0 / static_cast<double>(n);
      p.means[k] = X.col(order[std::min(j, order.size() - 1)]);
      p.covs[k] = fallbackCovariance(stats, K);
    }
  }
  const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= total;
  return !empty.empty();
}

struct Run {
  Params params;
  int iterations = 0;
  double logLikelihood = 0.0;
  bool converged = false;
  std::vector<double> history;
  std::vector<int> rescues;
};

Run runEm(const Eigen::MatrixXd& X, const EmConfig& cfg, std::uint64_t seed,
          const DataStats& stats, Exec exec) {
  Run run;
  run.params = kmeansPlusPlus(X, cfg.numComponents, seed, stats);
  Evaluation e = evaluate(run.params, X, exec);
  run.history.push_back(e.logLikelihood);
  double ll = e.logLikelihood;
  for (int it = 1; it <= cfg.maxIterations; ++it) {
    if (maximize(run.params, X, e, stats)) run.rescues.push_back(it);
    run.iterations = it;
    e = evaluate(run.params, X, exec);
    run.history.push_back(e.logLikelihood);
    const double change = std::abs(e.logLikelihood - ll);
    const double ref = std::abs(ll) > 0.0 ? std::abs(ll) : 1.0;
    ll = e.logLikelihood;
    const bool rescuedNow = !run.rescues.empty() && run.rescues.back() == it;
    if (!rescuedNow && change <= cfg.logLikelihoodTolerance * ref) {
      run.converged = true;
      break;
    }
  }
  run.logLikelihood = ll;
  return run;
}

}  // namespace

EmResult fitEm(std::span<const Eigen::VectorXd> data, const EmConfig& cfg, Exec exec) {
  if (data.empty()) throw DataError("fitEm: no data");
  if (cfg.numComponents < 1) throw ConfigError("fitEm: numComponents must be >= 1");
  if (static_cast<std::size_t>(cfg.numComponents) > data.size()) {
    throw ConfigError("fitEm: numComponents exceeds the number of data points");
  }
  if (cfg.maxIterations < 1) throw ConfigError("fitEm: maxIterations must be >= 1");
  if (!(cfg.logLikelihoodTolerance > 0.0)) throw ConfigError("fitEm: tolerance must be > 0");
  if (!(cfg.covarianceFloor >= 0.0)) throw ConfigError("fitEm: covarianceFloor must be >= 0");
  if (cfg.initializations < 1) throw ConfigError("fitEm: initializations must be >= 1");

  const Eigen::Index d = data.front().size();
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = data[static_cast<std::size_t>(i)];
    if (x.size() != d) throw DataError("fitEm: data points have different dimensions");
    if (!x.allFinite()) throw DataError("fitEm: non-finite data point");
    X.col(i) = x;
  }

  DataStats stats;
  stats.mean = X.rowwise().mean();
  stats.variance = (X.colwise() - stats.mean).rowwise().squaredNorm() / static_cast<double>(n);
  stats.floor = stats.variance * cfg.covarianceFloor;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(stats.variance[i] > 0.0)) stats.floor[i] = cfg.covarianceFloor;
  }

  Run best;
  bool haveBest = false;
  for (int r = 0; r < cfg.initializations; ++r) {
    Run run = runEm(X, cfg, deriveSeed(cfg.seed, static_cast<std::uint64_t>(r)), stats, exec);
    if (!haveBest || run.logLikelihood > best.logLikelihood) {
      best = std::move(run);
      haveBest = true;
    }
  }

  std::vector<std::size_t> order(best.params.weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return best.params.weights[a] > best.params.weights[b];
  });
  std::vector<GaussianComponent> comps;
  for (auto k : order) {
    comps.push_back({best.params.weights[k], best.params.means[k], best.params.covs[k]});
  }
  return EmResult{Mixture(std::move(comps)), best.iterations, best.logLikelihood, best.converged,
                  std::move(best.history), std::move(best.rescues)};
}

}  // namespace hilreach
