#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gwr/regression.hpp"
#include "gwr/sample_estimation.hpp"

namespace gwr {

/// Rows of `unit_id,role,c1,...,cd` grouped by unit. Roles may use fewer
/// coordinates than the header provides; unused trailing cells stay empty.
struct LongFormatData {
  std::vector<std::string> unit_order;  // first appearance
  std::map<std::string, Matrix> predictors;
  std::map<std::string, Matrix> responses;
  Eigen::Index predictor_dim = 0;
  Eigen::Index response_dim = 0;
};

/// Throws Parse with the offending line number (the header is line 1).
/// NaN and infinite coordinates are rejected.
LongFormatData read_long_format(std::istream& in, const std::string& source = "<input>");
LongFormatData read_long_format_file(const std::string& path);
void write_long_format(std::ostream& out, const LongFormatData& data);

/// Throws Parse naming the first unit that lacks one of the two roles.
void require_both_roles(const LongFormatData& data, const std::vector<std::string>& units);

struct MeasureRow {
  std::string unit_id;
  GaussianMeasure measure;
  std::optional<bool> projected;
  std::optional<double> eta;
};

/// `# gwr measures schema_version=1`, then `unit_id,m1..md,c11,c12,..,cdd`
/// (covariance row-major), optionally followed by `projected,eta`.
void write_measures(std::ostream& out, const std::vector<MeasureRow>& rows);
std::vector<MeasureRow> read_measures(std::istream& in, const std::string& source = "<input>");

enum class CsvLayout { Long, Measures };
/// Decided by the first header line: `unit_id,role,...` or `unit_id,m1,...`.
CsvLayout detect_layout(const std::string& path);

/// Per-unit measures of one role from either layout; long-format blocks are
/// reduced to their empirical moments.
std::vector<MeasureRow> read_role_measures(const std::string& path, const std::string& role);

/// %.9g
std::string format_real(double v);

}  // namespace gwr
