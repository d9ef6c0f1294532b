#pragma once

// Subcommands of the flatband-lab tool. Each writes its outputs into `out`
// together with the resolved configuration echo.

#include "flatband/config.hpp"
#include "flatband/effective.hpp"
#include "flatband/propagator.hpp"

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

namespace flatband {

namespace fs = std::filesystem;

inline constexpr double kCompareHorizon = 20.0;  // summary window t <= 20 hbar/J

struct CommandResult {
  std::vector<fs::path> files;
  std::string report;
};

CommandResult cmd_bands(const RunConfig& config, const fs::path& out);
CommandResult cmd_sample(const RunConfig& config, const fs::path& out);
CommandResult cmd_evolve(const RunConfig& config, const fs::path& out);
CommandResult cmd_predict(const RunConfig& config, const fs::path& out);
CommandResult cmd_lifetime(const RunConfig& config, const fs::path& out);

struct CompareReport {
  std::vector<double> times, survival_exact, survival_pred, abs_diff, stderr_exact;
  double max_abs_diff = 0.0;  // over t <= kCompareHorizon
  fs::path file;
};

// Joins exact_dir/scalars.csv (partial-trace survival) with pred_dir/survival_pred.csv.
CompareReport cmd_compare(const fs::path& exact_dir, const fs::path& pred_dir, const fs::path& out);

EnsembleResult run_config_ensemble(const RunConfig& config);
std::vector<fs::path> write_ensemble(const EnsembleResult& result, const fs::path& out);

struct Prediction {
  MomentumTrajectory exact_rates;
  MomentumTrajectory asymptotic_rates;
};
Prediction run_config_prediction(const RunConfig& config);
std::vector<fs::path> write_prediction(const Prediction& prediction, const fs::path& out);

// 0 success, 2 configuration, 3 numerical, 4 I/O.
int exit_code_for(const std::exception& e);

}  // namespace flatband
