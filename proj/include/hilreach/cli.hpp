#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hilreach/mixture.hpp"
#include "hilreach/propagate.hpp"
#include "hilreach/trajio.hpp"

namespace hilreach {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

struct TrialReport {
  std::filesystem::path path;
  bool included = false;
  bool heldOut = false;
  std::string reason;
  std::size_t rows = 0;
};

struct TrainingSet {
  std::vector<TrainingWindow> training;
  std::vector<TrainingWindow> validation;
  std::vector<TrialReport> report;
};

// Loads every trial in `dir`, extracts post-spawn windows and moves the last
// `holdout` usable trials (in file order) to the validation set. Throws
// DataError when no trial is usable or fewer than holdout + 1 are.
TrainingSet collectWindows(const std::filesystem::path& dir, double window, std::size_t holdout);

// Mean log-density of the rows under the mixture.
double meanLogLikelihood(const Mixture& mixture, std::span<const Eigen::VectorXd> rows);

// Writes `values` as CSV lines with 17 significant digits.
std::string csvLine(std::span<const double> values);

// Axis header line followed by ny rows of nx densities (row j is y_j).
std::string gridCsv(const DensityGrid& grid);

// Runs one subcommand (generate | train | predict | compare | risk | serve |
// regression-curve) and returns the process exit code.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hilreach
