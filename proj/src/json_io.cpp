#include "hilreach/json_io.hpp"

#include <fstream>
#include <sstream>

#include "hilreach/errors.hpp"

namespace hilreach::io {
namespace {

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

json rectJson(const Rect& r) {
  return {{"xMin", r.xMin}, {"xMax", r.xMax}, {"yMin", r.yMin}, {"yMax", r.yMax}};
}

Rect rectFromJson(const json& j) {
  return {j.at("xMin").get<double>(), j.at("xMax").get<double>(), j.at("yMin").get<double>(),
          j.at("yMax").get<double>()};
}

template <class T>
void readOptional(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

json toJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json toJson(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(toJson(Eigen::VectorXd(m.row(r).transpose())));
  return out;
}

Eigen::VectorXd vectorFromJson(const json& j) {
  return guarded("vector", [&] {
    if (!j.is_array()) throw DataError("vector: expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
  });
}

Eigen::MatrixXd matrixFromJson(const json& j) {
  return guarded("matrix", [&] {
    if (!j.is_array() || j.empty()) throw DataError("matrix: expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        throw DataError("matrix: ragged rows");
      }
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  });
}

json toJson(const Mixture& mixture) {
  json comps = json::array();
  for (const auto& c : mixture) {
    comps.push_back({{"weight", c.weight}, {"mean", toJson(c.mean)}, {"covariance", toJson(c.covariance)}});
  }
  return {{"dimension", mixture.dimension()}, {"components", comps}};
}

Mixture mixtureFromJson(const json& j) {
  return guarded("mixture", [&] {
    const int d = j.at("dimension").get<int>();
    std::vector<GaussianComponent> comps;
    for (const auto& c : j.at("components")) {
      GaussianComponent g;
      g.weight = c.at("weight").get<double>();
      g.mean = vectorFromJson(c.at("mean"));
      g.covariance = matrixFromJson(c.at("covariance"));
      if (g.mean.size() != d || g.covariance.rows() != d || g.covariance.cols() != d) {
        throw DataError("mixture: component does not match the declared dimension " +
                        std::to_string(d));
      }
      comps.push_back(std::move(g));
    }
    return Mixture(std::move(comps));
  });
}

json toJson(const PlantParams& p) {
  return {{"dt", p.dt},
          {"g", p.g},
          {"mass", p.mass},
          {"inertiaX", p.inertiaX},
          {"k1", p.k1},
          {"k2", p.k2},
          {"k3", p.k3},
          {"alphaBounds", {p.alphaBounds.lo, p.alphaBounds.hi}},
          {"thrustBounds", {p.thrustBounds.lo, p.thrustBounds.hi}}};
}

PlantParams plantParamsFromJson(const json& j) {
  auto p = guarded("plant params", [&] {
    PlantParams p;
    readOptional(j, "dt", p.dt);
    readOptional(j, "g", p.g);
    readOptional(j, "mass", p.mass);
    readOptional(j, "inertiaX", p.inertiaX);
    readOptional(j, "k1", p.k1);
    readOptional(j, "k2", p.k2);
    readOptional(j, "k3", p.k3);
    if (j.contains("alphaBounds")) {
      p.alphaBounds = {j["alphaBounds"].at(0).get<double>(), j["alphaBounds"].at(1).get<double>()};
    }
    if (j.contains("thrustBounds")) {
      p.thrustBounds = {j["thrustBounds"].at(0).get<double>(), j["thrustBounds"].at(1).get<double>()};
    }
    return p;
  });
  p.validate();
  return p;
}

json toJson(const Belief& belief) {
  return {{"time", belief.time}, {"stepIndex", belief.stepIndex}, {"mixture", toJson(belief.mixture)}};
}

Belief beliefFromJson(const json& j) {
  // A bare mixture document is accepted as a belief at time 0.
  if (!j.contains("mixture")) return {mixtureFromJson(j), 0.0, 0};
  Belief b = guarded("belief", [&] {
    return Belief{mixtureFromJson(j.at("mixture")), j.value("time", 0.0), j.value("stepIndex", 0)};
  });
  validateBelief(b);
  return b;
}

json toJson(const BeliefTrajectory& trajectory) {
  json steps = json::array();
  for (const auto& b : trajectory.steps) steps.push_back(toJson(b));
  json diag = json::array();
  for (const auto& d : trajectory.diagnostics) {
    diag.push_back({{"eta", d.eta},
                    {"raw", d.rawComponents},
                    {"kept", d.keptComponents},
                    {"merges", d.merges.size()},
                    {"inputPriorFallback", d.inputPriorFallback}});
  }
  return {{"steps", steps}, {"diagnostics", diag}};
}

json toJson(const std::vector<MergeRecord>& merges) {
  json out = json::array();
  for (const auto& m : merges) {
    out.push_back({{"pair", {m.first, m.second}}, {"klUpperBound", m.klUpperBound}, {"result", m.result}});
  }
  return out;
}

json toJson(const DangerZone& z) {
  return {{"xMin", z.xMin}, {"xMax", z.xMax}, {"yMin", z.yMin}, {"yMax", z.yMax}};
}

DangerZone dangerZoneFromJson(const json& j) {
  DangerZone z = guarded("danger zone", [&] {
    return DangerZone{j.at("xMin").get<double>(), j.at("xMax").get<double>(),
                      j.at("yMin").get<double>(), j.at("yMax").get<double>()};
  });
  z.validate();
  return z;
}

json toJson(const WorldConfig& w) {
  json candidates = json::array();
  for (const auto& r : w.spawn.candidates) candidates.push_back(rectJson(r));
  return {{"laneBoundaries", w.laneBoundaries},
          {"groundY", w.groundY},
          {"ceilingY", w.ceilingY},
          {"touchpad", rectJson(w.touchpad)},
          {"spawn", {{"earliest", w.spawn.earliest}, {"latest", w.spawn.latest}, {"candidates", candidates}}},
          {"vehicleRadius", w.vehicleRadius},
          {"landingSpeed", w.landingSpeed},
          {"startX", w.startX},
          {"startY", w.startY},
          {"startDescent", w.startDescent},
          {"maxDuration", w.maxDuration}};
}

WorldConfig worldConfigFromJson(const json& j) {
  WorldConfig w = guarded("world", [&] {
    WorldConfig w;
    readOptional(j, "laneBoundaries", w.laneBoundaries);
    readOptional(j, "groundY", w.groundY);
    readOptional(j, "ceilingY", w.ceilingY);
    if (j.contains("touchpad")) w.touchpad = rectFromJson(j["touchpad"]);
    if (j.contains("spawn")) {
      const auto& s = j["spawn"];
      readOptional(s, "earliest", w.spawn.earliest);
      readOptional(s, "latest", w.spawn.latest);
      if (s.contains("candidates")) {
        w.spawn.candidates.clear();
        for (const auto& r : s["candidates"]) w.spawn.candidates.push_back(rectFromJson(r));
      }
    }
    readOptional(j, "vehicleRadius", w.vehicleRadius);
    readOptional(j, "landingSpeed", w.landingSpeed);
    readOptional(j, "startX", w.startX);
    readOptional(j, "startY", w.startY);
    readOptional(j, "startDescent", w.startDescent);
    readOptional(j, "maxDuration", w.maxDuration);
    return w;
  });
  w.validate();
  return w;
}

json toJson(const McResult& r) {
  json hull = json::array();
  for (const auto& p : r.convexHull2d) hull.push_back({p.x(), p.y()});
  return {{"samples", r.finalStates.size()},
          {"empiricalMean", toJson(Eigen::VectorXd(r.empiricalMean))},
          {"empiricalCov", toJson(Eigen::MatrixXd(r.empiricalCov))},
          {"convexHull2d", hull},
          {"hullArea", polygonArea(r.convexHull2d)}};
}

json readJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void writeText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void writeJson(const std::filesystem::path& path, const json& j) { writeText(path, j.dump(2) + "\n"); }

}  // namespace hilreach::io
