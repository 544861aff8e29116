#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "gwr/regression.hpp"

namespace gwr {

/// Process exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitNumerical = 3 };

/// Units selected by a split rule, in file order. Rules: `all`, `first:<k>`,
/// `rest:<k>` (everything after the first k), `max-id:<v>` and `min-id:<v>`
/// (numeric unit ids <= v, resp. > v).
std::vector<std::string> apply_split(const std::vector<std::string>& units, const std::string& rule);

struct SimulateOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<ModelKind> kind;
  std::optional<int> rank;
  std::optional<int> runs;
  std::string out_dir = ".";
  /// Write one mixture dataset (long-format CSV, n units with N draws per
  /// role) to out_dir/data.csv instead of running the Monte Carlo study.
  bool dataset_only = false;
};
/// Writes runs.csv, summary.json and manifest.json (or data.csv and
/// manifest.json) under out_dir.
void cmd_simulate(const SimulateOptions& opt, std::ostream& log);

struct FitCommandOptions {
  std::string data_path;
  ModelKind kind = ModelKind::Basic;
  std::optional<int> rank;
  std::string split = "all";
  std::string out_dir = ".";
  std::uint64_t seed = 0x5eed;
  bool standardize = false;
  /// Fit a single training unit (exact interpolation) instead of failing.
  bool allow_single_unit = false;
};
/// Writes model.json and manifest.json under out_dir.
void cmd_fit(const FitCommandOptions& opt, std::ostream& log);

struct PredictOptions {
  std::string model_path;
  std::string data_path;  // long format (predictor rows) or measure CSV
  std::string split = "all";
  std::string out_path = "predictions.csv";
};
void cmd_predict(const PredictOptions& opt, std::ostream& log);

struct EvalOptions {
  std::string predicted_path;
  /// Measure/prediction CSV, or long format whose response rows are used.
  std::string observed_path;
  std::optional<std::string> out_path;  // stdout when empty
  std::string label = "wasserstein";
};
void cmd_eval(const EvalOptions& opt, std::ostream& out);

struct BarycenterOptions {
  std::string data_path;
  std::string role = "predictor";
  std::optional<std::string> out_path;  // stdout when empty
};
void cmd_barycenter(const BarycenterOptions& opt, std::ostream& out);

}  // namespace gwr
