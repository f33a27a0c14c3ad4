#include <random>

#include <benchmark/benchmark.h>

#include "hilreach/kernels.hpp"
#include "hilreach/propagate.hpp"
#include "hilreach/reduce.hpp"
#include "hilreach/regression.hpp"
#include "hilreach/scenario.hpp"

using namespace hilreach;

namespace {

Exec modeOf(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

Mixture randomMixture(int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<GaussianComponent> comps;
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXd a(d, d);
    for (auto& v : a.reshaped()) v = n(rng);
    Eigen::VectorXd mu(d);
    for (auto& v : mu) v = 3.0 * n(rng);
    comps.push_back({1.0, mu, a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d)});
  }
  return Mixture(comps);
}

void BM_Responsibilities(benchmark::State& state) {
  const Mixture m = groundTruthBehavior();
  std::vector<GaussianEvaluator> gs;
  std::vector<double> lw;
  for (std::size_t k = 0; k < m.size(); ++k) {
    gs.emplace_back(m[k].mean, m[k].covariance, k);
    lw.push_back(std::log(m[k].weight));
  }
  const auto rows = sample(m, 121 * 113, 1);
  Eigen::MatrixXd data(3, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) data.col(static_cast<Eigen::Index>(i)) = rows[i];
  Eigen::MatrixXd resp;
  Eigen::VectorXd logNorm;
  for (auto _ : state) {
    kernels::responsibilities(gs, lw, data, resp, logNorm, modeOf(state));
    benchmark::DoNotOptimize(resp.data());
  }
}

void BM_ReduceMixture(benchmark::State& state) {
  const Mixture m = randomMixture(6, 48, 2);
  for (auto _ : state) benchmark::DoNotOptimize(reduceMixture(m, 16, modeOf(state)));
}

void BM_ExpandComponents(benchmark::State& state) {
  const PlantModel plant = buildPlant({});
  const Mixture inputs = randomMixture(2, 3, 3);
  const Mixture belief = randomMixture(6, 16, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::expandComponents(plant, inputs, belief, modeOf(state)));
}

void BM_Predict(benchmark::State& state) {
  const PlantModel plant = buildPlant({});
  const BehaviorModel model = splitBlocks(groundTruthBehavior());
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(defaultInitialBelief(), plant, model, PredictConfig{}, modeOf(state)));
  }
}

void BM_GridDensity(benchmark::State& state) {
  std::vector<kernels::PlanarGaussian> comps;
  const Mixture m = randomMixture(2, 16, 5);
  for (const auto& c : m) comps.push_back({c.weight, c.mean, c.covariance});
  std::vector<double> xs(161), ys(81), out;
  for (int i = 0; i < 161; ++i) xs[static_cast<std::size_t>(i)] = -40.0 + 0.5 * i;
  for (int j = 0; j < 81; ++j) ys[static_cast<std::size_t>(j)] = -15.0 + 0.5 * j;
  for (auto _ : state) {
    kernels::gridDensity(comps, xs, ys, out, modeOf(state));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_SimulatePaths(benchmark::State& state) {
  const PlantModel plant = buildPlant({});
  const BehaviorModel model = splitBlocks(groundTruthBehavior());
  const MixtureSampler initial(defaultInitialBelief().mixture);
  std::vector<MixtureSampler> inputs;
  for (int k = 0; k < 100; ++k) inputs.emplace_back(conditionOnTime(model, 0.04 * k).mixture);
  kernels::PathSpec spec;
  spec.plant = &plant;
  spec.initial = &initial;
  spec.inputs = inputs;
  spec.horizon = 100;
  spec.seed = 6;
  const std::vector<int> snaps{100};
  std::vector<std::vector<StateVector>> out;
  for (auto _ : state) {
    kernels::simulatePaths(spec, 5000, snaps, out, modeOf(state));
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Responsibilities)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReduceMixture)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpandComponents)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Predict)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridDensity)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulatePaths)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
