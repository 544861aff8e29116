#pragma once

#include <Eigen/Dense>

namespace gwr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative tolerance for treating slightly negative eigenvalues as zero.
inline constexpr double kPsdRelTol = 1e-10;
/// Absolute floor on the smallest eigenvalue of a positive-definite matrix.
inline constexpr double kSpdTol = 1e-10;

/// psd_tolerance = 1e-10 * (1 + max|eigenvalue|).
double psd_tolerance(const Eigen::VectorXd& eigenvalues);

/// Symmetric d x d matrix. Construction symmetrizes (M + M^T) / 2 so the
/// stored entries are exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index d) { return SymMatrix(Matrix::Identity(d, d)); }
  static SymMatrix zero(Eigen::Index d) { return SymMatrix(Matrix::Zero(d, d)); }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Symmetric matrix whose smallest eigenvalue exceeds kSpdTol.
class SpdMatrix {
 public:
  /// Throws NotPositiveDefinite.
  explicit SpdMatrix(SymMatrix m);
  explicit SpdMatrix(const Matrix& m) : SpdMatrix(SymMatrix(m)) {}

  Eigen::Index dim() const { return m_.dim(); }
  const SymMatrix& sym() const { return m_; }
  const Matrix& matrix() const { return m_.matrix(); }

 private:
  SymMatrix m_;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
struct SymEigen {
  Vector values;
  Matrix vectors;
};

SymEigen sym_eigen(const SymMatrix& m);

/// Rebuild V diag(f(lambda)) V^T and re-symmetrize.
template <typename F>
SymMatrix recompose(const SymEigen& e, F&& f) {
  Vector mapped = e.values.unaryExpr(std::forward<F>(f));
  return SymMatrix(e.vectors * mapped.asDiagonal() * e.vectors.transpose());
}

SymMatrix sqrt_psd(const SymMatrix& m);
SymMatrix invsqrt_pd(const SpdMatrix& m);
double min_eigenvalue(const SymMatrix& m);
/// Frobenius-nearest positive-semidefinite matrix (negative eigenvalues clipped).
SymMatrix project_psd(const SymMatrix& m);

}  // namespace gwr
