#pragma once

#include <span>
#include <vector>

namespace gwr {

/// Quantile with linear interpolation between order statistics: position
/// h = (n - 1) * prob into the sorted sample.
double quantile(std::span<const double> values, double prob);

struct FiveNumberSummary {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

FiveNumberSummary five_number_summary(std::span<const double> values);

}  // namespace gwr
