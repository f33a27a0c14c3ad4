#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "hilreach/mixture.hpp"
#include "hilreach/oracle.hpp"
#include "hilreach/plant.hpp"
#include "hilreach/propagate.hpp"
#include "hilreach/reduce.hpp"
#include "hilreach/risk.hpp"
#include "hilreach/scenario.hpp"

namespace hilreach::io {

using nlohmann::json;

// {dimension, components: [{weight, mean, covariance (full, row-major)}]}.
// Loading validates the declared dimension and covariance symmetry.
json toJson(const Mixture& mixture);
Mixture mixtureFromJson(const json& j);

// Keys mirror the PlantParams fields; missing keys keep their defaults.
json toJson(const PlantParams& params);
PlantParams plantParamsFromJson(const json& j);

// {time, stepIndex, mixture}.
json toJson(const Belief& belief);
Belief beliefFromJson(const json& j);

// {steps: [belief...], componentCounts: [{raw, kept, eta}...]}.
json toJson(const BeliefTrajectory& trajectory);

json toJson(const std::vector<MergeRecord>& merges);
json toJson(const DangerZone& zone);
DangerZone dangerZoneFromJson(const json& j);

json toJson(const WorldConfig& world);
WorldConfig worldConfigFromJson(const json& j);

// Summary only: empirical moments and hull, no per-sample states.
json toJson(const McResult& result);

json toJson(const Eigen::VectorXd& v);
json toJson(const Eigen::MatrixXd& m);
Eigen::VectorXd vectorFromJson(const json& j);
Eigen::MatrixXd matrixFromJson(const json& j);

// File helpers. Parse failures and malformed documents raise DataError.
json readJson(const std::filesystem::path& path);
void writeJson(const std::filesystem::path& path, const json& j);
void writeText(const std::filesystem::path& path, const std::string& text);

}  // namespace hilreach::io
