#include "gwr/regression.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "gwr/error.hpp"

namespace gwr {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Basic: return "basic";
    case ModelKind::LowRank: return "lowrank";
  }
  return "basic";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "basic") return ModelKind::Basic;
  if (text == "lowrank" || text == "low-rank") return ModelKind::LowRank;
  throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + std::string(text) + "'");
}

namespace {

void check_pairs(std::span<const XiElement> x, std::size_t m) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "no training units");
  if (x.size() != m) throw Error(ErrorCode::DimensionMismatch, "predictor and response counts differ");
  const Eigen::Index d = x.front().dim();
  for (const auto& xi : x) require_same_dim(xi.dim(), d, "predictor dimensions differ");
}

Matrix feature_matrix(std::span<const XiElement> x) {
  const Eigen::Index p = vech_star_size(x.front().dim());
  Matrix f(static_cast<Eigen::Index>(x.size()), p);
  for (std::size_t i = 0; i < x.size(); ++i) f.row(static_cast<Eigen::Index>(i)) = vech_star(x[i]).transpose();
  return f;
}

}  // namespace

IdentifiedTensor fit_basic(std::span<const XiElement> x, std::span<const XiElement> y,
                           const ReferenceMeasure& ref_out) {
  check_pairs(x, y.size());
  const Eigen::Index d1 = x.front().dim();
  const Eigen::Index d2 = ref_out.dim();
  for (const auto& yi : y) require_same_dim(yi.dim(), d2, "response dimension does not match reference");

  const Matrix features = feature_matrix(x);
  Matrix responses(features.rows(), vech_star_size(d2));
  for (std::size_t i = 0; i < y.size(); ++i) responses.row(static_cast<Eigen::Index>(i)) = vech_star(y[i]).transpose();

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(features);
  const Matrix coef = cod.solve(responses);  // p1 x p2, minimum norm

  const Eigen::Index p1 = vech_star_size(d1);
  Vector theta(vec_star_size(d1, d2));
  for (Eigen::Index k = 0; k < coef.cols(); ++k) theta.segment(k * p1, p1) = coef.col(k);
  return tensor_of_theta(theta, d1, d2);
}

double regression_objective(std::span<const XiElement> x, std::span<const XiElement> y, const CoefficientTensor& b,
                            const ReferenceMeasure& ref_out) {
  check_pairs(x, y.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = xi_norm(y[i] - contract(x[i], b), ref_out);
    total += r * r;
  }
  return total;
}

double boundary_eta(const XiElement& u) {
  if (in_range(u)) return 1.0;
  const double lo = min_eigenvalue(u.V);
  // 1 + eta * lo >= 0 binds at the smallest eigenvalue (lo < -1 here).
  return std::min(1.0, -1.0 / lo);
}

Prediction project_and_exp(const XiElement& u, const ReferenceMeasure& ref_out) {
  const double eta = boundary_eta(u);
  if (eta >= 1.0) return {exp_map(u, ref_out), false, 1.0};
  return {exp_map(u * eta, ref_out), true, eta};
}

Prediction predict(const FittedModel& model, const GaussianMeasure& nu1) {
  require_same_dim(nu1.dim(), model.ref_in.dim(), "predictor dimension does not match model");
  const XiElement x = log_map(nu1, model.ref_in);
  return project_and_exp(contract(x, model.tensor), model.ref_out);
}

FittedModel fit_model(std::span<const XiElement> x, std::span<const XiElement> y, const ReferenceMeasure& ref_in,
                      const ReferenceMeasure& ref_out, ModelKind kind, const LowRankOptions& options, int rank) {
  check_pairs(x, y.size());
  require_same_dim(x.front().dim(), ref_in.dim(), "predictor dimension does not match input reference");

  FitDiagnostics diag;
  CoefficientTensor tensor;
  std::optional<LowRankFactors> factors;
  if (kind == ModelKind::Basic) {
    tensor = fit_basic(x, y, ref_out).coefficients();
    diag.objective = regression_objective(x, y, tensor, ref_out);
    diag.iterations = 1;
  } else {
    if (rank < 1) throw Error(ErrorCode::InvalidArgument, "low-rank model needs rank >= 1");
    LowRankFit fit = fit_low_rank(x, y, ref_out, rank, options);
    tensor = fit.factors.materialize();
    diag.objective = fit.objective;
    diag.iterations = fit.iterations;
    diag.restarts = fit.restarts;
    diag.singular_blocks = fit.singular_blocks;
    factors = std::move(fit.factors);
  }
  for (const auto& xi : x) {
    if (!in_range(contract(xi, tensor))) ++diag.boundary_projections;
  }
  return FittedModel{kind, kind == ModelKind::LowRank ? rank : 0, std::move(tensor), std::move(factors),
                     ref_in, ref_out, diag};
}

Matrix fit_scalar(std::span<const XiElement> x, std::span<const double> z) {
  check_pairs(x, z.size());
  const Matrix features = feature_matrix(x);
  const Vector target = Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(z.size()));
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(features);
  const Vector coef = cod.solve(target);
  return lower_slice_from_vech_star(coef, x.front().dim());
}

double predict_scalar(const Matrix& coefficients, const XiElement& x) {
  const Matrix xm = x.as_matrix();
  if (xm.rows() != coefficients.rows() || xm.cols() != coefficients.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "scalar coefficients do not match predictor");
  }
  return xm.cwiseProduct(coefficients).sum();
}

}  // namespace gwr
