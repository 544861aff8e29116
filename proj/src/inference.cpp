#include "gwr/inference.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "gwr/error.hpp"

namespace gwr {

SandwichCovariance sandwich_covariance(std::span<const XiElement> x, std::span<const XiElement> y,
                                       const Vector& theta_hat, const ReferenceMeasure& ref_out) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "no observations");
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "predictor and response counts differ");
  const Eigen::Index d1 = x.front().dim();
  const Eigen::Index d2 = ref_out.dim();
  const Eigen::Index p1 = vech_star_size(d1);
  const Eigen::Index p2 = vech_star_size(d2);
  const Eigen::Index dim = p1 * p2;
  if (theta_hat.size() != dim) throw Error(ErrorCode::LengthMismatch, "theta has the wrong length");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n <= dim) {
    throw Error(ErrorCode::InvalidArgument,
                "sandwich needs more observations (" + std::to_string(n) + ") than parameters (" +
                    std::to_string(dim) + ")");
  }

  const Matrix gram = vech_gram(ref_out);
  // Coefficients for output coordinate k sit in theta.segment(k * p1, p1).
  const Eigen::Map<const Matrix> coef(theta_hat.data(), p1, p2);

  Matrix xtx = Matrix::Zero(p1, p1);
  Matrix meat = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    require_same_dim(x[static_cast<std::size_t>(i)].dim(), d1, "predictor dimensions differ");
    require_same_dim(y[static_cast<std::size_t>(i)].dim(), d2, "response dimensions differ");
    const Vector f = vech_star(x[static_cast<std::size_t>(i)]);
    const Vector resid = vech_star(y[static_cast<std::size_t>(i)]) - coef.transpose() * f;
    xtx.noalias() += f * f.transpose();
    // grad m = -2 (G r) kron f
    const Vector gr = gram * resid;
    Vector grad(dim);
    for (Eigen::Index k = 0; k < p2; ++k) grad.segment(k * p1, p1) = -2.0 * gr(k) * f;
    meat.noalias() += grad * grad.transpose();
  }
  meat /= static_cast<double>(n);
  xtx /= static_cast<double>(n);

  Matrix hessian(dim, dim);
  for (Eigen::Index k = 0; k < p2; ++k)
    for (Eigen::Index l = 0; l < p2; ++l) hessian.block(k * p1, l * p1, p1, p1) = 2.0 * gram(k, l) * xtx;

  Eigen::SelfAdjointEigenSolver<Matrix> es(hessian, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(dim - 1);
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw Error(ErrorCode::SingularHessian, "Hessian condition number exceeds 1e12");
  }
  const Matrix inv = hessian.inverse();
  SandwichCovariance out;
  out.hessian = hessian;
  out.meat = meat;
  out.n = static_cast<std::size_t>(n);
  Matrix cov = inv * meat * inv / static_cast<double>(n);
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

}  // namespace gwr
