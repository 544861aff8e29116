#pragma once

#include <span>
#include <vector>

#include "gwr/regression.hpp"

namespace gwr {

/// Per-unit observation matrices (rows = draws, columns = coordinates).
/// Units may have different row counts.
struct SampleBlock {
  std::vector<Matrix> units;

  std::size_t size() const { return units.size(); }
  Eigen::Index dim() const { return units.empty() ? 0 : units.front().cols(); }
};

/// Row mean and 1/N covariance of the rows. A single row gives a zero
/// covariance. Throws EmptyBlock when there are no rows.
GaussianMeasure empirical_moments(const Matrix& obs);

std::vector<GaussianMeasure> empirical_moments(const SampleBlock& block);

struct FitOptions {
  ModelKind kind = ModelKind::Basic;
  int rank = 0;
  LowRankOptions low_rank;
  FrechetOptions frechet;
};

/// Estimates both Frechet means, maps every pair into tangent coordinates and
/// fits the requested model. Throws DegenerateReference when either Frechet
/// mean is singular.
FittedModel fit_from_measures(std::span<const GaussianMeasure> predictors, std::span<const GaussianMeasure> responses,
                              const FitOptions& options);

/// fit_from_measures on the empirical moments of each unit.
FittedModel fit_from_samples(const SampleBlock& predictors, const SampleBlock& responses, const FitOptions& options);

}  // namespace gwr
