#include "gwr/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gwr/error.hpp"

namespace gwr {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> sorted_copy(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace

double quantile(std::span<const double> values, double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
  return sorted_quantile(sorted_copy(values), prob);
}

FiveNumberSummary five_number_summary(std::span<const double> values) {
  const auto sorted = sorted_copy(values);
  return {sorted.front(), sorted_quantile(sorted, 0.25), sorted_quantile(sorted, 0.5), sorted_quantile(sorted, 0.75),
          sorted.back()};
}

}  // namespace gwr
