#include "gwr/sample_estimation.hpp"

#include "gwr/error.hpp"

namespace gwr {

GaussianMeasure empirical_moments(const Matrix& obs) {
  if (obs.rows() == 0) throw Error(ErrorCode::EmptyBlock, "unit has no observations");
  if (!obs.allFinite()) throw Error(ErrorCode::InvalidArgument, "observations must be finite");
  const double n = static_cast<double>(obs.rows());
  const Vector mean = obs.colwise().mean().transpose();
  const Matrix centered = obs.rowwise() - mean.transpose();
  return GaussianMeasure(mean, SymMatrix(centered.transpose() * centered / n));
}

std::vector<GaussianMeasure> empirical_moments(const SampleBlock& block) {
  std::vector<GaussianMeasure> out;
  out.reserve(block.size());
  for (const auto& unit : block.units) {
    require_same_dim(unit.cols(), block.dim(), "units have different dimensions");
    out.push_back(empirical_moments(unit));
  }
  return out;
}

namespace {

ReferenceMeasure reference_for(std::span<const GaussianMeasure> measures, const FrechetOptions& options,
                               bool& warning, const char* role) {
  FrechetResult fm = frechet_mean_detailed(measures, std::nullopt, options);
  warning = warning || fm.first_order_warning;
  try {
    return ReferenceMeasure(fm.mean);
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateReference, std::string(role) + " Frechet mean is singular: " + e.what());
  }
}

}  // namespace

FittedModel fit_from_measures(std::span<const GaussianMeasure> predictors, std::span<const GaussianMeasure> responses,
                              const FitOptions& options) {
  if (predictors.empty()) throw Error(ErrorCode::EmptyInput, "no training units");
  if (predictors.size() != responses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "predictor and response unit counts differ");
  }
  bool warning = false;
  ReferenceMeasure ref_in = [&] {
    try {
      return reference_for(predictors, options.frechet, warning, "predictor");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateInput) throw Error(ErrorCode::DegenerateReference, e.what());
      throw;
    }
  }();
  ReferenceMeasure ref_out = [&] {
    try {
      return reference_for(responses, options.frechet, warning, "response");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateInput) throw Error(ErrorCode::DegenerateReference, e.what());
      throw;
    }
  }();

  std::vector<XiElement> x;
  std::vector<XiElement> y;
  x.reserve(predictors.size());
  y.reserve(responses.size());
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    x.push_back(log_map(predictors[i], ref_in));
    y.push_back(log_map(responses[i], ref_out));
  }
  FittedModel model = fit_model(x, y, ref_in, ref_out, options.kind, options.low_rank, options.rank);
  model.diagnostics.frechet_warning = warning;
  return model;
}

FittedModel fit_from_samples(const SampleBlock& predictors, const SampleBlock& responses, const FitOptions& options) {
  if (predictors.size() != responses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "predictor and response unit counts differ");
  }
  const auto pred = empirical_moments(predictors);
  const auto resp = empirical_moments(responses);
  return fit_from_measures(pred, resp, options);
}

}  // namespace gwr
