#include "gwr/matrix_functions.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gwr/error.hpp"

namespace gwr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyBlock: return "EmptyBlock";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

double psd_tolerance(const Vector& eigenvalues) {
  const double scale = eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
  return kPsdRelTol * (1.0 + scale);
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  }
  m_ = 0.5 * (m + m.transpose());
}

SpdMatrix::SpdMatrix(SymMatrix m) : m_(std::move(m)) {
  const double lo = min_eigenvalue(m_);
  if (!(lo > kSpdTol)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lo << " <= " << kSpdTol;
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
}

SymEigen sym_eigen(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix sqrt_psd(const SymMatrix& m) {
  const SymEigen e = sym_eigen(m);
  const double tol = psd_tolerance(e.values);
  if (e.values.size() > 0 && e.values(0) < -tol) {
    std::ostringstream os;
    os << "smallest eigenvalue " << e.values(0) << " below -" << tol;
    throw Error(ErrorCode::NotPositiveSemidefinite, os.str());
  }
  return recompose(e, [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
}

SymMatrix invsqrt_pd(const SpdMatrix& m) {
  const SymEigen e = sym_eigen(m.sym());
  if (!(e.values(0) > kSpdTol)) {
    throw Error(ErrorCode::NotPositiveDefinite, "matrix is not positive definite");
  }
  return recompose(e, [](double v) { return 1.0 / std::sqrt(v); });
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

SymMatrix project_psd(const SymMatrix& m) {
  const SymEigen e = sym_eigen(m);
  if (e.values.size() == 0 || e.values(0) >= 0.0) return m;
  return recompose(e, [](double v) { return v > 0.0 ? v : 0.0; });
}

}  // namespace gwr
