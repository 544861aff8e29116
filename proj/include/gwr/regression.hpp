#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "gwr/low_rank.hpp"
#include "gwr/tensor.hpp"

namespace gwr {

enum class ModelKind { Basic, LowRank };

std::string_view to_string(ModelKind kind);
/// Accepts "basic", "lowrank" and "low-rank".
ModelKind parse_model_kind(std::string_view text);

/// Least-squares fit of the basic model in the identified space. Each vech*
/// coordinate of the response is regressed on vech*(X) by ordinary least
/// squares; because every coordinate shares the same regressors the weighted
/// problem has the same solution. Rank-deficient designs use the minimum-norm
/// solution. `ref_out` only fixes the response dimension here.
IdentifiedTensor fit_basic(std::span<const XiElement> x, std::span<const XiElement> y,
                           const ReferenceMeasure& ref_out);

/// sum_i ||Y_i - <X_i, B>_2||^2 in the reference norm of `ref_out`.
double regression_objective(std::span<const XiElement> x, std::span<const XiElement> y,
                            const CoefficientTensor& b, const ReferenceMeasure& ref_out);

struct FitDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  int restarts = 0;
  int singular_blocks = 0;
  /// Training units whose in-sample fit left the range of the exp map.
  int boundary_projections = 0;
  bool frechet_warning = false;
};

/// Fitted Gaussian-to-Gaussian regression map exp_out o Gamma_B o log_in.
struct FittedModel {
  ModelKind kind = ModelKind::Basic;
  int rank = 0;
  CoefficientTensor tensor;
  std::optional<LowRankFactors> factors;
  ReferenceMeasure ref_in;
  ReferenceMeasure ref_out;
  FitDiagnostics diagnostics;
};

struct Prediction {
  GaussianMeasure measure;
  bool projected = false;
  /// Radial shrinkage applied to the tangent fit; 1 when no projection.
  double eta = 1.0;
};

/// Largest eta in [0, 1] with eta * V + I positive semidefinite.
double boundary_eta(const XiElement& u);

/// Maps a tangent fit to a measure, shrinking it towards the origin when it
/// falls outside the range of the exp map.
Prediction project_and_exp(const XiElement& u, const ReferenceMeasure& ref_out);

Prediction predict(const FittedModel& model, const GaussianMeasure& nu1);

/// Fits the basic or rank-K model on tangent data already expressed against
/// `ref_in` / `ref_out`.
FittedModel fit_model(std::span<const XiElement> x, std::span<const XiElement> y, const ReferenceMeasure& ref_in,
                      const ReferenceMeasure& ref_out, ModelKind kind, const LowRankOptions& options = {},
                      int rank = 0);

// ---- scalar response ----------------------------------------------------

/// Least squares of Z on vech*(X); returns the identified (lower triangular)
/// d1 x (d1+1) coefficient matrix.
Matrix fit_scalar(std::span<const XiElement> x, std::span<const double> z);
/// <X, M> over all d x (d+1) entries.
double predict_scalar(const Matrix& coefficients, const XiElement& x);

}  // namespace gwr
