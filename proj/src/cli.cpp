#include "hilreach/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hilreach/errors.hpp"
#include "hilreach/json_io.hpp"
#include "hilreach/oracle.hpp"
#include "hilreach/regression.hpp"
#include "hilreach/risk.hpp"
#include "hilreach/rng.hpp"
#include "hilreach/scenario.hpp"
#include "hilreach/server.hpp"

namespace hilreach {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string formatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parseList(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !std::isfinite(v)) {
      throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

DangerZone parseZone(const std::string& text) {
  const auto v = parseList(text, "--zone");
  if (v.size() != 4) throw ConfigError("--zone expects xmin,xmax,ymin,ymax");
  DangerZone z{v[0], v[1], v[2], v[3]};
  z.validate();
  return z;
}

GridAxes parseGrid(const std::string& text) {
  const auto v = parseList(text, "--grid");
  if (v.size() != 6) throw ConfigError("--grid expects xmin,xmax,ymin,ymax,nx,ny");
  GridAxes a{v[0], v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5])};
  if (a.nx < 2 || a.ny < 2 || !(a.xMin < a.xMax) || !(a.yMin < a.yMax)) {
    throw ConfigError("--grid needs ordered ranges and nx, ny >= 2");
  }
  return a;
}

PlantParams loadPlant(const std::string& path) {
  if (path.empty()) return PlantParams{};
  return io::plantParamsFromJson(io::readJson(path));
}

BehaviorModel loadModel(const std::string& path) {
  const Mixture joint = io::mixtureFromJson(io::readJson(path));
  if (joint.dimension() != 3) {
    throw DataError("behavior model must be 3-dimensional [t, alpha, T], got " +
                    std::to_string(joint.dimension()));
  }
  return splitBlocks(joint);
}

Belief loadInit(const std::string& path) {
  if (path.empty()) return defaultInitialBelief();
  Belief b = io::beliefFromJson(io::readJson(path));
  validateBelief(b);
  return b;
}

int horizonSteps(double seconds, double dt, std::ostream& err) {
  if (!(seconds >= 0.0)) throw ConfigError("--horizon must be >= 0");
  const int steps = stepsFor(seconds, dt);
  if (std::abs(steps * dt - seconds) > 1e-9) {
    err << "warning: horizon " << seconds << " s is not a multiple of dt = " << dt
        << " s; rounded down to " << steps << " steps (" << steps * dt << " s)\n";
  }
  return steps;
}

std::string timeLabel(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

Mixture positionMarginal(const Mixture& m) {
  std::vector<GaussianComponent> comps;
  for (const auto& c : m) {
    comps.push_back({c.weight, c.mean.head<2>(), c.covariance.topLeftCorner<2, 2>()});
  }
  return Mixture(std::move(comps));
}

std::string samplesCsv(const std::vector<StateVector>& states) {
  std::string out = "px,py,theta,vx,vy,w\n";
  for (const auto& s : states) out += csvLine(std::span<const double>(s.data(), 6));
  return out;
}

std::string hullCsv(const std::vector<Point2>& hull) {
  std::string out = "x,y\n";
  for (const auto& p : hull) {
    const double v[2] = {p.x(), p.y()};
    out += csvLine(v);
  }
  return out;
}

std::string riskCsv(const std::vector<RiskPoint>& profile) {
  std::string out = "t,probability\n";
  for (const auto& r : profile) {
    const double v[2] = {r.t, r.probability};
    out += csvLine(v);
  }
  return out;
}

struct CommonPrediction {
  std::string model;
  std::string init;
  std::string plant;
  double horizon = 4.0;
  std::size_t maxComponents = 16;
};

void addPredictionOptions(CLI::App* cmd, CommonPrediction& o) {
  cmd->add_option("--model", o.model, "behavior model JSON")->required();
  cmd->add_option("--init", o.init, "initial belief JSON (default scenario when omitted)");
  cmd->add_option("--plant", o.plant, "plant parameter JSON overriding the defaults");
  cmd->add_option("--horizon", o.horizon, "prediction horizon in seconds")->capture_default_str();
  cmd->add_option("--max-components", o.maxComponents, "component budget after each step")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

// ---- generate -------------------------------------------------------------

struct GenerateOptions {
  std::string world;
  std::string pilot;
  std::string plant;
  int count = 121;
  std::uint64_t seed = 0;
  std::string out;
};

int cmdGenerate(const GenerateOptions& o, std::ostream& out) {
  if (o.count < 1) throw ConfigError("--count must be >= 1");
  const WorldConfig world = o.world.empty() ? WorldConfig{} : io::worldConfigFromJson(io::readJson(o.world));
  const Mixture joint = o.pilot.empty() ? groundTruthBehavior() : io::mixtureFromJson(io::readJson(o.pilot));
  const PlantModel plant = buildPlant(loadPlant(o.plant));
  SyntheticPilot pilot{splitBlocks(joint), {}, 0};
  const auto trials =
      generateSyntheticTrials(pilot, world, plant, static_cast<std::size_t>(o.count), o.seed);
  fs::create_directories(o.out);
  std::size_t landed = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    saveTrajectory(trials[i], trialPath(o.out, i));
    landed += trials[i].outcome == Outcome::Landed;
  }
  out << "wrote " << trials.size() << " trials to " << o.out << " (" << landed << " landed)\n";
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainOptions {
  std::string trials;
  double window = 4.5;
  int components = 3;
  std::string out;
  std::size_t holdout = 0;
  std::uint64_t seed = 0;
  int maxIterations = 500;
  double tolerance = 1e-6;
  double floor = 1e-6;
  int restarts = 10;
};

int cmdTrain(const TrainOptions& o, std::ostream& out) {
  if (o.components < 1) throw ConfigError("--components must be >= 1");
  if (!(o.window >= 0.0)) throw ConfigError("--window must be >= 0");
  const TrainingSet set = collectWindows(o.trials, o.window, o.holdout);
  for (const auto& r : set.report) {
    out << r.path.filename().string() << ": ";
    if (r.included) {
      out << (r.heldOut ? "validation" : "training") << ", " << r.rows << " rows\n";
    } else {
      out << "excluded (" << r.reason << ")\n";
    }
  }
  const auto data = concatenateWindows(set.training);
  EmConfig cfg;
  cfg.numComponents = o.components;
  cfg.maxIterations = o.maxIterations;
  cfg.logLikelihoodTolerance = o.tolerance;
  cfg.covarianceFloor = o.floor;
  cfg.seed = o.seed;
  cfg.initializations = o.restarts;
  const EmResult fit = fitEm(data, cfg);
  splitBlocks(fit.mixture);  // rejects models unusable for time conditioning

  json doc = io::toJson(fit.mixture);
  json training = {{"trials", set.training.size()},
                   {"rows", data.size()},
                   {"window", o.window},
                   {"iterations", fit.iterations},
                   {"converged", fit.converged},
                   {"logLikelihood", fit.logLikelihood}};
  out << "training: " << set.training.size() << " trials, " << data.size()
      << " rows, log-likelihood " << formatNumber(fit.logLikelihood) << " after "
      << fit.iterations << " iterations" << (fit.converged ? "" : " (not converged)") << "\n";
  if (!set.validation.empty()) {
    const auto validation = concatenateWindows(set.validation);
    const double mean = meanLogLikelihood(fit.mixture, validation);
    training["validationRows"] = validation.size();
    training["validationMeanLogLikelihood"] = mean;
    out << "validation: " << set.validation.size() << " trials, " << validation.size()
        << " rows, mean log-likelihood " << formatNumber(mean) << "\n";
  }
  doc["training"] = training;
  io::writeJson(o.out, doc);
  out << "model written to " << o.out << "\n";
  return kExitOk;
}

// ---- predict --------------------------------------------------------------

struct PredictOptions {
  CommonPrediction common;
  std::string at;
  std::string zone;
  std::string grid = "-40,40,-15,25,161,81";
  std::string out;
  std::string emit = "beliefs,grid,risk";
  bool traceReduction = false;
};

int cmdPredict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  const PlantModel plant = buildPlant(loadPlant(o.common.plant));
  const BehaviorModel model = loadModel(o.common.model);
  const Belief initial = loadInit(o.common.init);
  PredictConfig cfg;
  cfg.horizonSteps = horizonSteps(o.common.horizon, plant.params.dt, err);
  cfg.maxComponents = o.common.maxComponents;
  const GridAxes axes = parseGrid(o.grid);
  const std::optional<DangerZone> zone =
      o.zone.empty() ? std::nullopt : std::optional<DangerZone>(parseZone(o.zone));

  std::vector<double> at = o.at.empty() ? std::vector<double>{cfg.horizonSteps * plant.params.dt}
                                        : parseList(o.at, "--at");
  std::vector<int> atSteps;
  for (double t : at) {
    const int k = horizonSteps(t, plant.params.dt, err);
    if (k > cfg.horizonSteps) throw ConfigError("--at " + formatNumber(t) + " lies beyond the horizon");
    atSteps.push_back(k);
  }

  bool emitBeliefs = false, emitGrid = false, emitRisk = false;
  for (const auto& item : CLI::detail::split(o.emit, ',')) {
    if (item == "beliefs") emitBeliefs = true;
    else if (item == "grid") emitGrid = true;
    else if (item == "risk") emitRisk = true;
    else throw ConfigError("--emit accepts beliefs, grid and risk");
  }

  const BeliefTrajectory traj = predict(initial, plant, model, cfg);
  fs::create_directories(o.out);
  const fs::path dir(o.out);

  json report = json::array();
  for (std::size_t i = 0; i < at.size(); ++i) {
    const Belief& b = traj.steps[static_cast<std::size_t>(atSteps[i])];
    const Moments m = moments(b.mixture);
    json entry = {{"t", b.time},
                  {"step", b.stepIndex},
                  {"components", b.mixture.size()},
                  {"mean", io::toJson(m.mean)},
                  {"covariance", io::toJson(m.covariance)}};
    if (zone) entry["collisionProbability"] = collisionProbability(b, *zone);
    if (emitGrid) {
      const auto name = "grid_" + timeLabel(b.stepIndex * plant.params.dt) + ".csv";
      io::writeText(dir / name, gridCsv(densityGrid(b, axes)));
      entry["grid"] = name;
    }
    report.push_back(entry);
    out << "t = " << timeLabel(b.time) << " s: " << b.mixture.size() << " components, mean p = ("
        << formatNumber(m.mean[0]) << ", " << formatNumber(m.mean[1]) << ")";
    if (zone) out << ", collision probability " << formatNumber(entry["collisionProbability"].get<double>());
    out << "\n";
  }
  io::writeJson(dir / "report.json", report);
  if (emitBeliefs) io::writeJson(dir / "beliefs.json", io::toJson(traj));
  if (emitRisk && zone) io::writeText(dir / "risk.csv", riskCsv(riskProfile(traj, *zone)));
  if (o.traceReduction) {
    json merges = json::array();
    for (std::size_t k = 0; k < traj.diagnostics.size(); ++k) {
      merges.push_back({{"step", k + 1}, {"merges", io::toJson(traj.diagnostics[k].merges)}});
    }
    io::writeJson(dir / "merges.json", merges);
  }
  return kExitOk;
}

// ---- compare --------------------------------------------------------------

struct CompareOptions {
  CommonPrediction common;
  std::size_t samples = 5000;
  std::string mode = "behavior";
  std::uint64_t seed = 0;
  bool saturate = false;
  double quantile = 0.95;
  std::string grid = "-40,40,-15,25,161,81";
  std::string out;
};

int cmdCompare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  if (o.samples < 1) throw ConfigError("--samples must be >= 1");
  if (!(o.quantile > 0.0 && o.quantile < 1.0)) throw ConfigError("--quantile must lie in (0, 1)");
  const PlantModel plant = buildPlant(loadPlant(o.common.plant));
  const BehaviorModel model = loadModel(o.common.model);
  const Belief initial = loadInit(o.common.init);
  PredictConfig cfg;
  cfg.horizonSteps = horizonSteps(o.common.horizon, plant.params.dt, err);
  cfg.maxComponents = o.common.maxComponents;

  McConfig mc;
  mc.samples = o.samples;
  mc.horizonSteps = cfg.horizonSteps;
  mc.seed = o.seed;
  mc.saturate = o.saturate;
  if (o.mode == "behavior") mc.inputMode = InputMode::BehaviorModel;
  else if (o.mode == "uniform") mc.inputMode = InputMode::UniformBounds;
  else throw ConfigError("--mode must be behavior or uniform");

  const BeliefTrajectory traj = predict(initial, plant, model, cfg);
  const Belief& final = traj.steps.back();
  const McResult res = runMonteCarlo(initial, plant, &model, mc);
  const Moments pred = moments(final.mixture);

  const Eigen::VectorXd meanDiff = Eigen::VectorXd(res.empiricalMean) - pred.mean;
  const double n = static_cast<double>(o.samples);
  const Eigen::VectorXd stdErr = (res.empiricalCov.diagonal() / n).cwiseSqrt();
  const double covDiff = (Eigen::MatrixXd(res.empiricalCov) - pred.covariance).norm();

  // Density level enclosing `quantile` of the predicted position mass, from
  // draws of the prediction itself; then the share of Monte-Carlo samples
  // that lie inside that highest-density region.
  const Mixture planar = positionMarginal(final.mixture);
  const MixtureEvaluator eval(planar);
  const auto draws = sample(planar, o.samples, deriveSeed(o.seed, 0x5eedULL));
  std::vector<double> levels;
  levels.reserve(draws.size());
  for (const auto& d : draws) levels.push_back(eval.logDensity(d));
  std::sort(levels.begin(), levels.end());
  const auto cut = static_cast<std::size_t>(std::floor((1.0 - o.quantile) * (levels.size() - 1)));
  const double level = levels[cut];
  std::size_t above = 0;
  for (const auto& s : res.finalStates) above += eval.logDensity(s.head<2>()) >= level;
  const double fraction = static_cast<double>(above) / n;
  const double hullArea = polygonArea(res.convexHull2d);

  fs::create_directories(o.out);
  const fs::path dir(o.out);
  io::writeText(dir / "grid.csv", gridCsv(densityGrid(final, parseGrid(o.grid))));
  io::writeText(dir / "samples.csv", samplesCsv(res.finalStates));
  io::writeText(dir / "hull.csv", hullCsv(res.convexHull2d));
  json report = {{"mode", o.mode},
                 {"samples", o.samples},
                 {"horizon", final.time},
                 {"seed", o.seed},
                 {"meanDiff", io::toJson(meanDiff)},
                 {"meanStdErr", io::toJson(stdErr)},
                 {"covDiffFrobenius", covDiff},
                 {"densityQuantile", o.quantile},
                 {"fractionOfSamplesAboveDensityQuantile", fraction},
                 {"hullArea", hullArea},
                 {"predictedMean", io::toJson(pred.mean)},
                 {"empiricalMean", io::toJson(Eigen::VectorXd(res.empiricalMean))}};
  io::writeJson(dir / "report.json", report);
  out << "mode " << o.mode << ", " << o.samples << " samples, horizon " << timeLabel(final.time)
      << " s\n"
      << "max |meanDiff| / SE = " << formatNumber(meanDiff.cwiseQuotient(stdErr).cwiseAbs().maxCoeff())
      << ", covariance Frobenius gap = " << formatNumber(covDiff) << "\n"
      << "fraction inside the " << o.quantile << " density region = " << formatNumber(fraction)
      << ", hull area = " << formatNumber(hullArea) << " m^2\n";
  return kExitOk;
}

// ---- risk -----------------------------------------------------------------

struct RiskOptions {
  CommonPrediction common;
  std::string zone;
  std::string out;
};

int cmdRisk(const RiskOptions& o, std::ostream& out, std::ostream& err) {
  const PlantModel plant = buildPlant(loadPlant(o.common.plant));
  const BehaviorModel model = loadModel(o.common.model);
  const Belief initial = loadInit(o.common.init);
  const DangerZone zone = parseZone(o.zone);
  PredictConfig cfg;
  cfg.horizonSteps = horizonSteps(o.common.horizon, plant.params.dt, err);
  cfg.maxComponents = o.common.maxComponents;
  const std::string csv = riskCsv(riskProfile(predict(initial, plant, model, cfg), zone));
  if (o.out.empty()) {
    out << csv;
  } else {
    io::writeText(o.out, csv);
  }
  return kExitOk;
}

// ---- regression-curve -----------------------------------------------------

struct CurveOptions {
  std::string model;
  double t0 = 0.0;
  double t1 = 4.5;
  double dt = 0.04;
  std::string out;
};

int cmdCurve(const CurveOptions& o, std::ostream& out) {
  if (!(o.dt > 0.0) || !(o.t1 >= o.t0)) throw ConfigError("regression curve needs t0 <= t1 and dt > 0");
  const BehaviorModel model = loadModel(o.model);
  std::string csv = "t,mean_alpha,mean_T,std_alpha,std_T\n";
  for (const auto& p : regressionCurve(model, o.t0, o.t1, o.dt)) {
    const double v[5] = {p.t, p.mean[0], p.mean[1], p.stddev[0], p.stddev[1]};
    csv += csvLine(v);
  }
  if (o.out.empty()) {
    out << csv;
  } else {
    io::writeText(o.out, csv);
  }
  return kExitOk;
}

// ---- serve ----------------------------------------------------------------

struct ServeOptions {
  std::string model;
  std::string world;
  std::string plant;
  std::optional<int> port;
  std::string trialsDir;
  std::uint64_t seed = 0;
  double tickMs = 40.0;
};

int cmdServe(const ServeOptions& o, std::ostream& out) {
  ServerConfig cfg = applyEnvironment(ServerConfig{});
  if (o.port) {
    if (*o.port < 0 || *o.port > 65535) throw ConfigError("--port must lie in [0, 65535]");
    cfg.port = static_cast<unsigned short>(*o.port);
  }
  if (!o.trialsDir.empty()) cfg.trialsDir = o.trialsDir;
  if (!o.world.empty()) cfg.world = io::worldConfigFromJson(io::readJson(o.world));
  cfg.plant = loadPlant(o.plant);
  if (!o.model.empty()) cfg.overlayModel = std::make_shared<const BehaviorModel>(loadModel(o.model));
  if (!(o.tickMs > 0.0)) throw ConfigError("--tick-ms must be > 0");
  cfg.tickInterval = std::chrono::microseconds(static_cast<long long>(o.tickMs * 1000.0));
  cfg.seed = o.seed;
  Server server(cfg);
  out << "serving on " << cfg.address << ":" << cfg.port << ", trials in " << cfg.trialsDir.string()
      << std::endl;
  server.runUntilSignal();
  return kExitOk;
}

}  // namespace

TrainingSet collectWindows(const fs::path& dir, double window, std::size_t holdout) {
  TrainingSet set;
  std::vector<std::pair<std::size_t, TrainingWindow>> usable;
  for (const auto& path : listTrials(dir)) {
    TrialReport r;
    r.path = path;
    try {
      auto w = extractWindow(loadTrajectory(path), window);
      r.included = true;
      r.rows = w.rows.size();
      usable.emplace_back(set.report.size(), std::move(w));
    } catch (const DataError& e) {
      r.reason = e.what();
    }
    set.report.push_back(std::move(r));
  }
  if (usable.empty()) throw DataError("no usable trials in " + dir.string());
  if (usable.size() <= holdout) {
    throw DataError("holdout " + std::to_string(holdout) + " leaves no training trials (" +
                    std::to_string(usable.size()) + " usable)");
  }
  const std::size_t cut = usable.size() - holdout;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    if (i < cut) {
      set.training.push_back(std::move(usable[i].second));
    } else {
      set.report[usable[i].first].heldOut = true;
      set.validation.push_back(std::move(usable[i].second));
    }
  }
  return set;
}

double meanLogLikelihood(const Mixture& mixture, std::span<const Eigen::VectorXd> rows) {
  if (rows.empty()) throw DataError("no rows to score");
  const MixtureEvaluator eval(mixture);
  double total = 0.0;
  for (const auto& r : rows) total += eval.logDensity(r);
  return total / static_cast<double>(rows.size());
}

std::string csvLine(std::span<const double> values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += formatNumber(values[i]);
  }
  line += '\n';
  return line;
}

std::string gridCsv(const DensityGrid& grid) {
  const auto& a = grid.axes;
  std::string out = "# xMin=" + formatNumber(a.xMin) + " xMax=" + formatNumber(a.xMax) +
                    " nx=" + std::to_string(a.nx) + " yMin=" + formatNumber(a.yMin) +
                    " yMax=" + formatNumber(a.yMax) + " ny=" + std::to_string(a.ny) + "\n";
  for (int j = 0; j < a.ny; ++j) {
    out += csvLine(std::span<const double>(grid.values.data() + static_cast<std::size_t>(j) * a.nx,
                                           static_cast<std::size_t>(a.nx)));
  }
  return out;
}

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human-behavior-aware reachability for a planar multi-rotor", "hilreach"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "write synthetic piloting trials");
  generate->add_option("--world", gen.world, "world config JSON");
  generate->add_option("--pilot", gen.pilot, "pilot behavior model JSON (ground truth when omitted)");
  generate->add_option("--plant", gen.plant, "plant parameter JSON");
  generate->add_option("-n,--count", gen.count, "number of trials")->capture_default_str();
  generate->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "output directory")->required();

  TrainOptions train;
  auto* trainCmd = app.add_subcommand("train", "fit the behavior model to trial windows");
  trainCmd->add_option("--trials", train.trials, "directory of trial_NNN.csv files")->required();
  trainCmd->add_option("--window", train.window, "seconds after the spawn")->capture_default_str();
  trainCmd->add_option("-M,--components", train.components, "mixture components")->capture_default_str();
  trainCmd->add_option("--out", train.out, "model JSON to write")->required();
  trainCmd->add_option("--holdout", train.holdout, "trials kept for validation")->capture_default_str();
  trainCmd->add_option("--seed", train.seed, "EM initialization seed")->capture_default_str();
  trainCmd->add_option("--max-iter", train.maxIterations, "EM iteration cap")->capture_default_str();
  trainCmd->add_option("--tol", train.tolerance, "relative log-likelihood tolerance")->capture_default_str();
  trainCmd->add_option("--floor", train.floor, "relative covariance floor")->capture_default_str();
  trainCmd->add_option("--restarts", train.restarts, "k-means++ initializations")->capture_default_str();

  PredictOptions pred;
  auto* predictCmd = app.add_subcommand("predict", "propagate the belief under the behavior model");
  addPredictionOptions(predictCmd, pred.common);
  predictCmd->add_option("--at", pred.at, "report instants in seconds, comma separated");
  predictCmd->add_option("--zone", pred.zone, "danger zone xmin,xmax,ymin,ymax");
  predictCmd->add_option("--grid", pred.grid, "density grid xmin,xmax,ymin,ymax,nx,ny")->capture_default_str();
  predictCmd->add_option("--emit", pred.emit, "artifacts: beliefs,grid,risk")->capture_default_str();
  predictCmd->add_flag("--trace-reduction", pred.traceReduction, "write merges.json");
  predictCmd->add_option("--out", pred.out, "output directory")->required();

  CompareOptions cmp;
  auto* compareCmd = app.add_subcommand("compare", "compare the prediction with Monte-Carlo samples");
  addPredictionOptions(compareCmd, cmp.common);
  compareCmd->add_option("--samples", cmp.samples, "Monte-Carlo samples")->capture_default_str();
  compareCmd->add_option("--mode", cmp.mode, "input mode: behavior or uniform")->capture_default_str();
  compareCmd->add_option("--seed", cmp.seed, "Monte-Carlo seed")->capture_default_str();
  compareCmd->add_flag("--saturate", cmp.saturate, "clamp behavior-mode inputs to the bounds");
  compareCmd->add_option("--quantile", cmp.quantile, "probability mass of the density region")->capture_default_str();
  compareCmd->add_option("--grid", cmp.grid, "density grid xmin,xmax,ymin,ymax,nx,ny")->capture_default_str();
  compareCmd->add_option("--out", cmp.out, "output directory")->required();

  RiskOptions risk;
  auto* riskCmd = app.add_subcommand("risk", "danger-zone probability per prediction step");
  addPredictionOptions(riskCmd, risk.common);
  riskCmd->add_option("--zone", risk.zone, "danger zone xmin,xmax,ymin,ymax")->required();
  riskCmd->add_option("--out", risk.out, "CSV path (stdout when omitted)");

  ServeOptions serve;
  auto* serveCmd = app.add_subcommand("serve", "run the live pilot service");
  serveCmd->add_option("--model", serve.model, "behavior model for live overlays");
  serveCmd->add_option("--world", serve.world, "world config JSON");
  serveCmd->add_option("--plant", serve.plant, "plant parameter JSON");
  serveCmd->add_option("--port", serve.port, "listen port (default PORT or 8080)");
  serveCmd->add_option("--trials-dir", serve.trialsDir, "where trials are saved (default TRIALS_DIR or ./trials)");
  serveCmd->add_option("--seed", serve.seed, "base seed for session spawn schedules");
  serveCmd->add_option("--tick-ms", serve.tickMs, "wall-clock tick period")->capture_default_str();

  CurveOptions curve;
  auto* curveCmd = app.add_subcommand("regression-curve", "conditional input mean and spread over time");
  curveCmd->add_option("--model", curve.model, "behavior model JSON")->required();
  curveCmd->add_option("--t0", curve.t0)->capture_default_str();
  curveCmd->add_option("--t1", curve.t1)->capture_default_str();
  curveCmd->add_option("--dt", curve.dt)->capture_default_str();
  curveCmd->add_option("--out", curve.out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*generate) return cmdGenerate(gen, out);
    if (*trainCmd) return cmdTrain(train, out);
    if (*predictCmd) return cmdPredict(pred, out, err);
    if (*compareCmd) return cmdCompare(cmp, out, err);
    if (*riskCmd) return cmdRisk(risk, out, err);
    if (*serveCmd) return cmdServe(serve, out);
    if (*curveCmd) return cmdCurve(curve, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace hilreach
