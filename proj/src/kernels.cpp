#include "hilreach/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "hilreach/errors.hpp"
#include "hilreach/rng.hpp"

namespace hilreach::kernels {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Runs body(i) for i in [0, n). The parallel path captures the first
// exception thrown by any iteration and rethrows it on the calling thread.
template <class Body>
void forEach(long n, Exec exec, Body&& body) {
  if (exec == Exec::Serial) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(hilreach_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

void responsibilityRow(std::span<const GaussianEvaluator> gaussians,
                       std::span<const double> logWeights, const Eigen::MatrixXd& data,
                       Eigen::MatrixXd& resp, Eigen::VectorXd& logNorm, Eigen::Index n) {
  const auto K = static_cast<Eigen::Index>(gaussians.size());
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < K; ++k) {
    const double v = logWeights[k] + gaussians[k].logPdf(data.col(n));
    resp(n, k) = v;
    best = std::max(best, v);
  }
  if (!std::isfinite(best)) {
    logNorm[n] = best;
    resp.row(n).setConstant(1.0 / static_cast<double>(K));
    return;
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) sum += std::exp(resp(n, k) - best);
  const double lse = best + std::log(sum);
  logNorm[n] = lse;
  for (Eigen::Index k = 0; k < K; ++k) resp(n, k) = std::exp(resp(n, k) - lse);
}

}  // namespace

void responsibilities(std::span<const GaussianEvaluator> gaussians,
                      std::span<const double> logWeights, const Eigen::MatrixXd& data,
                      Eigen::MatrixXd& resp, Eigen::VectorXd& logNorm, Exec exec) {
  const Eigen::Index N = data.cols();
  resp.resize(N, static_cast<Eigen::Index>(gaussians.size()));
  logNorm.resize(N);
  forEach(static_cast<long>(N), exec, [&](long n) {
    responsibilityRow(gaussians, logWeights, data, resp, logNorm, n);
  });
}

double regularizedLogDet(const Eigen::MatrixXd& covariance, double ridge) {
  Eigen::MatrixXd m = covariance;
  m.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  if ((diag.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  return 2.0 * diag.array().log().sum();
}

double pairScore(const GaussianComponent& a, double logDetA, const GaussianComponent& b,
                 double logDetB, double ridge) {
  const double w = a.weight + b.weight;
  if (!(w > 0.0)) return 0.0;
  const double wa = a.weight / w;
  const double wb = b.weight / w;
  const Eigen::VectorXd diff = a.mean - b.mean;
  const Eigen::MatrixXd merged =
      wa * a.covariance + wb * b.covariance + (wa * wb) * (diff * diff.transpose());
  const double logDetMerged = regularizedLogDet(merged, ridge);
  if (!std::isfinite(logDetA) || !std::isfinite(logDetB) || !std::isfinite(logDetMerged)) {
    throw NumericError("reduction: covariance not positive definite after regularization");
  }
  return 0.5 * (w * logDetMerged - a.weight * logDetA - b.weight * logDetB);
}

void pairScores(std::span<const GaussianComponent> comps, std::span<const double> logDets,
                std::span<const char> active, double ridge, Eigen::MatrixXd& scores, Exec exec) {
  const auto n = static_cast<long>(comps.size());
  auto row = [&](long i) {
    if (!active[i]) return;
    for (long j = i + 1; j < n; ++j) {
      if (!active[j]) continue;
      scores(i, j) = pairScore(comps[i], logDets[i], comps[j], logDets[j], ridge);
    }
  };
  forEach(n, exec, row);
}

std::vector<GaussianComponent> expandComponents(const PlantModel& plant, const Mixture& inputs,
                                                const Mixture& state, Exec exec) {
  if (state.dimension() != 6) throw DataError("belief must be 6-dimensional");
  if (inputs.dimension() != 2) throw DataError("input distribution must be 2-dimensional");
  const Eigen::MatrixXd A = plant.A;
  const Eigen::MatrixXd B = plant.B;
  const std::size_t M = inputs.size();
  const std::size_t L = state.size();

  std::vector<Eigen::VectorXd> stateMeans(L), inputMeans(M);
  std::vector<Eigen::MatrixXd> stateCovs(L), inputCovs(M);
  for (std::size_t j = 0; j < L; ++j) {
    stateMeans[j] = A * state[j].mean;
    stateCovs[j] = A * state[j].covariance * A.transpose();
  }
  for (std::size_t i = 0; i < M; ++i) {
    inputMeans[i] = B * inputs[i].mean;
    inputCovs[i] = B * inputs[i].covariance * B.transpose();
  }

  std::vector<GaussianComponent> out(M * L);
  auto build = [&](long idx) {
    const auto i = static_cast<std::size_t>(idx) / L;
    const auto j = static_cast<std::size_t>(idx) % L;
    auto& c = out[static_cast<std::size_t>(idx)];
    c.weight = inputs[i].weight * state[j].weight;
    c.mean = stateMeans[j] + inputMeans[i];
    const Eigen::MatrixXd cov = inputCovs[i] + stateCovs[j];
    c.covariance = 0.5 * (cov + cov.transpose());
  };
  const auto total = static_cast<long>(M * L);
  forEach(total, exec, build);
  return out;
}

void gridDensity(std::span<const PlanarGaussian> comps, std::span<const double> xs,
                 std::span<const double> ys, std::vector<double>& out, Exec exec) {
  struct Prepared {
    double logScale;
    Eigen::Vector2d mean;
    Eigen::Matrix2d precision;
  };
  std::vector<Prepared> prepared;
  for (const auto& c : comps) {
    if (c.weight <= 0.0) continue;
    const double det = c.covariance.determinant();
    if (!(det > 0.0)) throw NumericError("grid density: covariance not positive definite");
    prepared.push_back({std::log(c.weight) - kLog2Pi - 0.5 * std::log(det), c.mean,
                        c.covariance.inverse()});
  }
  const auto nx = static_cast<long>(xs.size());
  const auto ny = static_cast<long>(ys.size());
  out.assign(static_cast<std::size_t>(nx * ny), 0.0);
  auto row = [&](long iy) {
    for (long ix = 0; ix < nx; ++ix) {
      double v = 0.0;
      for (const auto& p : prepared) {
        const Eigen::Vector2d r(xs[ix] - p.mean[0], ys[iy] - p.mean[1]);
        v += std::exp(p.logScale - 0.5 * r.dot(p.precision * r));
      }
      out[static_cast<std::size_t>(iy * nx + ix)] = v;
    }
  };
  forEach(ny, exec, row);
}

void simulatePaths(const PathSpec& spec, std::size_t samples, std::span<const int> snapshotSteps,
                   std::vector<std::vector<StateVector>>& snapshots, Exec exec) {
  if (spec.plant == nullptr || spec.initial == nullptr) {
    throw ConfigError("simulatePaths: plant and initial sampler are required");
  }
  if (!spec.uniformInputs && spec.inputs.size() < static_cast<std::size_t>(spec.horizon)) {
    throw ConfigError("simulatePaths: one input sampler per step is required");
  }
  for (std::size_t j = 0; j < snapshotSteps.size(); ++j) {
    if (snapshotSteps[j] < 0 || snapshotSteps[j] > spec.horizon ||
        (j > 0 && snapshotSteps[j] <= snapshotSteps[j - 1])) {
      throw ConfigError("simulatePaths: snapshot steps must be ascending within the horizon");
    }
  }
  snapshots.assign(snapshotSteps.size(), std::vector<StateVector>(samples));
  const PlantModel& plant = *spec.plant;
  const Bounds alpha = plant.params.alphaBounds;
  const Bounds thrust = plant.params.thrustBounds;

  auto path = [&](long s) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(s));
    StateVector x = spec.initial->draw(rng);
    std::size_t next = 0;
    auto keep = [&](int k) {
      while (next < snapshotSteps.size() && snapshotSteps[next] == k) {
        snapshots[next][static_cast<std::size_t>(s)] = x;
        ++next;
      }
    };
    keep(0);
    for (int k = 0; k < spec.horizon; ++k) {
      InputVector u;
      if (spec.uniformInputs) {
        u[0] = alpha.lo + (alpha.hi - alpha.lo) * rng.uniform01();
        u[1] = thrust.lo + (thrust.hi - thrust.lo) * rng.uniform01();
      } else {
        u = spec.inputs[static_cast<std::size_t>(k)].draw(rng);
      }
      x = step(plant, x, u, spec.saturate);
      keep(k + 1);
    }
  };
  const auto total = static_cast<long>(samples);
  forEach(total, exec, path);
}

}  // namespace hilreach::kernels
