#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gwr/regression.hpp"
#include "gwr/simulation.hpp"

namespace gwr {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kVersion = "0.1.0";

/// Per-coordinate affine rescaling w -> (w - shift) / scale applied to raw
/// observations before moments are taken.
struct Standardization {
  Vector shift;
  Vector scale;

  /// Pooled mean and 1/N standard deviation of all rows; zero spreads map to 1.
  static Standardization fit(std::span<const Matrix> blocks);
  Matrix apply(const Matrix& rows) const;
  /// Pushes a measure in standardized coordinates back to raw coordinates.
  GaussianMeasure restore(const GaussianMeasure& m) const;
};

struct StoredModel {
  FittedModel model;
  std::optional<Standardization> standardize_in;
  std::optional<Standardization> standardize_out;
};

std::string model_to_json(const StoredModel& stored);
/// Throws Parse on malformed or inconsistent content, including a
/// schema_version other than kSchemaVersion.
StoredModel model_from_json(std::string_view text);

/// Scenario JSON: the ScenarioConfig fields by name (`model_kind` as
/// "basic"/"lowrank", `t_dof` null or a number, `low_rank` as an object with
/// restarts/max_iters/tol), plus optional `schema_version` and `preset`. Keys
/// override the preset. Throws Parse with line numbers for syntax errors and
/// unknown or mistyped fields.
ScenarioConfig scenario_from_json(std::string_view text, const std::string& source = "<config>");
std::string scenario_to_json(const ScenarioConfig& cfg);

/// Throws InvalidArgument for unknown names.
ScenarioConfig preset(std::string_view name);

/// `run,awd_proposed,awd_alternative,proj_proposed,proj_alternative`
std::string run_records_csv(std::span<const RunRecord> records);
std::string summary_json(const ScenarioConfig& cfg, const ScenarioSummary& summary);

std::uint64_t fnv1a(std::string_view bytes);

struct Manifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
};

std::string manifest_json(const Manifest& m);
/// UTC, ISO 8601 with seconds.
std::string utc_timestamp();

}  // namespace gwr
