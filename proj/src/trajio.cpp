#include "hilreach/trajio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hilreach {
namespace {

using Kind = TrajectoryFormatError::Kind;
using nlohmann::json;

constexpr double kTimeTolerance = 1e-9;

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

double parseField(std::string_view text, std::size_t line) {
  // strtod also accepts "nan" / "inf", which are reported separately below.
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw TrajectoryFormatError(Kind::MalformedRow,
                                "line " + std::to_string(line) + ": cannot parse '" + buf + "'");
  }
  if (!std::isfinite(v)) {
    throw TrajectoryFormatError(Kind::NonFiniteField,
                                "line " + std::to_string(line) + ": non-finite field");
  }
  return v;
}

void appendNumber(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string_view toString(Outcome outcome) {
  switch (outcome) {
    case Outcome::Landed:
      return "landed";
    case Outcome::Collided:
      return "collided";
    case Outcome::Aborted:
      return "aborted";
  }
  return "aborted";
}

Outcome parseOutcome(std::string_view text) {
  if (text == "landed") return Outcome::Landed;
  if (text == "collided") return Outcome::Collided;
  if (text == "aborted") return Outcome::Aborted;
  throw TrajectoryFormatError(Kind::BadSidecar, "unknown outcome '" + std::string(text) + "'");
}

void Trajectory::validate() const {
  if (samples.empty()) throw TrajectoryFormatError(Kind::Empty, "trajectory has no samples");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw TrajectoryFormatError(Kind::BadSidecar, "dt must be positive");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.t) || !s.state.allFinite() || !s.input.allFinite()) {
      throw TrajectoryFormatError(Kind::NonFiniteField,
                                  "sample " + std::to_string(i) + ": non-finite field");
    }
    if (i > 0 && !(s.t > samples[i - 1].t)) {
      throw TrajectoryFormatError(Kind::NonMonotonicTime,
                                  "non-monotonic time at sample " + std::to_string(i));
    }
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double gap = samples[i].t - samples[i - 1].t;
    if (std::abs(gap - dt) > kTimeTolerance) {
      throw TrajectoryFormatError(Kind::NonUniformDt,
                                  "non-uniform dt at sample " + std::to_string(i));
    }
  }
  if (spawnTime && !spawnIndex()) {
    throw TrajectoryFormatError(Kind::SpawnMismatch, "spawn time is not a sample timestamp");
  }
}

std::optional<std::size_t> Trajectory::spawnIndex() const {
  if (!spawnTime) return std::nullopt;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (std::abs(samples[i].t - *spawnTime) <= kTimeTolerance) return i;
  }
  return std::nullopt;
}

std::size_t windowRows(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

TrainingWindow extractWindow(const Trajectory& trajectory, double duration) {
  if (!(duration >= 0.0)) throw ConfigError("window duration must be >= 0");
  if (trajectory.outcome != Outcome::Landed) {
    throw WindowRejected("trial outcome is " + std::string(toString(trajectory.outcome)) +
                         ", only landed trials are used");
  }
  const auto start = trajectory.spawnIndex();
  if (!start) throw WindowRejected("trial has no obstacle spawn");
  const std::size_t rows = windowRows(duration, trajectory.dt);
  if (*start + rows > trajectory.samples.size()) {
    throw WindowRejected("trial ends before the " + std::to_string(duration) +
                         " s window after the spawn");
  }
  TrainingWindow w;
  w.duration = duration;
  w.rows.reserve(rows);
  const double t0 = trajectory.samples[*start].t;
  for (std::size_t i = *start; i < *start + rows; ++i) {
    const auto& s = trajectory.samples[i];
    w.rows.emplace_back(s.t - t0, s.input[0], s.input[1]);
  }
  return w;
}

std::vector<Eigen::VectorXd> concatenateWindows(const std::vector<TrainingWindow>& windows) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& w : windows) {
    for (const auto& r : w.rows) out.emplace_back(r);
  }
  return out;
}

std::string trajectoryCsv(const Trajectory& trajectory) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const auto& s : trajectory.samples) {
    appendNumber(out, s.t);
    for (int i = 0; i < 6; ++i) {
      out += ',';
      appendNumber(out, s.state[i]);
    }
    for (int i = 0; i < 2; ++i) {
      out += ',';
      appendNumber(out, s.input[i]);
    }
    out += '\n';
  }
  return out;
}

std::string trajectorySidecar(const Trajectory& trajectory) {
  json j;
  j["spawnTime"] = trajectory.spawnTime ? json(*trajectory.spawnTime) : json(nullptr);
  j["outcome"] = std::string(toString(trajectory.outcome));
  j["dt"] = trajectory.dt;
  return j.dump(2) + "\n";
}

Trajectory parseTrajectory(std::string_view csv, std::string_view sidecarJson) {
  Trajectory traj;
  try {
    const json side = json::parse(sidecarJson);
    traj.dt = side.at("dt").get<double>();
    traj.outcome = parseOutcome(side.at("outcome").get<std::string>());
    if (side.contains("spawnTime") && !side.at("spawnTime").is_null()) {
      traj.spawnTime = side.at("spawnTime").get<double>();
    }
  } catch (const json::exception& e) {
    throw TrajectoryFormatError(Kind::BadSidecar, std::string("sidecar: ") + e.what());
  }

  std::size_t line = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view row = csv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (header) {
      if (row != kTrajectoryHeader) {
        throw TrajectoryFormatError(Kind::MalformedHeader,
                                    "expected header '" + std::string(kTrajectoryHeader) + "'");
      }
      header = false;
      continue;
    }
    if (row.empty()) continue;
    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      fields.push_back(parseField(row.substr(start, comma - start), line));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 9) {
      throw TrajectoryFormatError(Kind::MalformedRow,
                                  "line " + std::to_string(line) + ": expected 9 fields");
    }
    TrajectorySample s;
    s.t = fields[0];
    for (int i = 0; i < 6; ++i) s.state[i] = fields[static_cast<std::size_t>(1 + i)];
    s.input = InputVector(fields[7], fields[8]);
    traj.samples.push_back(s);
  }
  if (header) throw TrajectoryFormatError(Kind::MalformedHeader, "missing header");
  traj.validate();
  return traj;
}

void saveTrajectory(const Trajectory& trajectory, const std::filesystem::path& csvPath) {
  trajectory.validate();
  writeFile(csvPath, trajectoryCsv(trajectory));
  auto side = csvPath;
  side.replace_extension(".json");
  writeFile(side, trajectorySidecar(trajectory));
}

Trajectory loadTrajectory(const std::filesystem::path& csvPath) {
  auto side = csvPath;
  side.replace_extension(".json");
  if (!std::filesystem::exists(side)) {
    throw TrajectoryFormatError(Kind::BadSidecar, "missing sidecar " + side.string());
  }
  return parseTrajectory(readFile(csvPath), readFile(side));
}

std::filesystem::path trialPath(const std::filesystem::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "trial_%03zu.csv", index);
  return dir / name;
}

std::vector<std::filesystem::path> listTrials(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("trial_", 0) == 0 &&
        entry.path().extension() == ".csv") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hilreach
