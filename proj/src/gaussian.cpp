#include "gwr/gaussian.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>

#include "gwr/error.hpp"

namespace gwr {

namespace {

// S(Sigma*, Sigma) given cached Sigma*^{1/2} and Sigma*^{-1/2}.
SymMatrix transport_from_root(const Matrix& root, const Matrix& invroot, const SymMatrix& target) {
  const SymMatrix inner(root * target.matrix() * root);
  const SymMatrix inner_sqrt = sqrt_psd(inner);
  return SymMatrix(invroot * inner_sqrt.matrix() * invroot);
}

}  // namespace

GaussianMeasure::GaussianMeasure(Vector mean, SymMatrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  require_same_dim(mean_.size(), cov_.dim(), "mean and covariance dimensions differ");
  if (!mean_.allFinite() || !cov_.matrix().allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "Gaussian parameters must be finite");
  }
  if (mean_.size() == 0) return;
  const SymEigen e = sym_eigen(cov_);
  if (e.values(0) >= 0.0) return;
  const double tol = psd_tolerance(e.values);
  if (e.values(0) < -tol) {
    std::ostringstream os;
    os << "covariance has eigenvalue " << e.values(0);
    throw Error(ErrorCode::NotPositiveSemidefinite, os.str());
  }
  cov_ = recompose(e, [](double v) { return v > 0.0 ? v : 0.0; });
}

ReferenceMeasure::ReferenceMeasure(GaussianMeasure measure) : measure_(std::move(measure)) {
  const SymEigen e = sym_eigen(measure_.cov());
  if (e.values.size() == 0 || !(e.values(0) > kSpdTol)) {
    std::ostringstream os;
    os << "reference covariance smallest eigenvalue "
       << (e.values.size() ? e.values(0) : 0.0) << " <= " << kSpdTol;
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
  cov_sqrt_ = recompose(e, [](double v) { return std::sqrt(v); });
  cov_invsqrt_ = recompose(e, [](double v) { return 1.0 / std::sqrt(v); });
}

XiElement XiElement::from_matrix(const Matrix& m) {
  if (m.cols() != m.rows() + 1) {
    throw Error(ErrorCode::DimensionMismatch, "Xi element matrix must be d x (d+1)");
  }
  const Eigen::Index d = m.rows();
  return {m.col(0), SymMatrix(m.rightCols(d))};
}

Matrix XiElement::as_matrix() const {
  const Eigen::Index d = dim();
  Matrix m(d, d + 1);
  m.col(0) = a;
  m.rightCols(d) = V.matrix();
  return m;
}

XiElement XiElement::operator+(const XiElement& o) const {
  require_same_dim(dim(), o.dim(), "Xi element dimensions differ");
  return {a + o.a, SymMatrix(V.matrix() + o.V.matrix())};
}

XiElement XiElement::operator-(const XiElement& o) const {
  require_same_dim(dim(), o.dim(), "Xi element dimensions differ");
  return {a - o.a, SymMatrix(V.matrix() - o.V.matrix())};
}

XiElement XiElement::operator*(double s) const { return {a * s, SymMatrix(V.matrix() * s)}; }

double wasserstein_distance(const GaussianMeasure& mu1, const GaussianMeasure& mu2) {
  require_same_dim(mu1.dim(), mu2.dim(), "Gaussian dimensions differ");
  const double mean_part = (mu1.mean() - mu2.mean()).squaredNorm();
  if (mu1.cov().matrix() == mu2.cov().matrix()) return std::sqrt(mean_part);

  // tr[S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2}] equals min over orthogonal U
  // of ||S1^{1/2} - S2^{1/2} U||_F^2, attained at the polar factor of
  // (S1^{1/2} S2^{1/2})^T. Evaluating the residual directly avoids the
  // cancellation of the trace form when the covariances nearly coincide.
  const Matrix r1 = sqrt_psd(mu1.cov()).matrix();
  const Matrix r2 = sqrt_psd(mu2.cov()).matrix();
  Eigen::JacobiSVD<Matrix> svd(r1 * r2, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix polar = svd.matrixV() * svd.matrixU().transpose();
  const double cov_part = (r1 - r2 * polar).squaredNorm();
  return std::sqrt(std::max(0.0, mean_part + cov_part));
}

SymMatrix transport_coefficient(const SpdMatrix& sigma1, const SymMatrix& sigma2) {
  require_same_dim(sigma1.dim(), sigma2.dim(), "covariance dimensions differ");
  const SymEigen e = sym_eigen(sigma1.sym());
  const SymEigen e2 = sym_eigen(sigma2);
  if (e2.values.size() && e2.values(0) < -psd_tolerance(e2.values)) {
    throw Error(ErrorCode::NotPositiveSemidefinite, "target covariance is not positive semidefinite");
  }
  const SymMatrix root = recompose(e, [](double v) { return std::sqrt(v); });
  const SymMatrix invroot = recompose(e, [](double v) { return 1.0 / std::sqrt(v); });
  return transport_from_root(root.matrix(), invroot.matrix(), sigma2);
}

Vector optimal_transport_apply(const GaussianMeasure& from, const GaussianMeasure& to, const Vector& x) {
  require_same_dim(from.dim(), to.dim(), "Gaussian dimensions differ");
  require_same_dim(from.dim(), x.size(), "point dimension differs");
  const SymMatrix s = transport_coefficient(SpdMatrix(from.cov()), to.cov());
  return to.mean() + s.matrix() * (x - from.mean());
}

double xi_inner_product(const XiElement& u, const XiElement& v, const ReferenceMeasure& ref) {
  require_same_dim(u.dim(), ref.dim(), "Xi element and reference dimensions differ");
  require_same_dim(v.dim(), ref.dim(), "Xi element and reference dimensions differ");
  const Vector lhs = u.a + u.V.matrix() * ref.mean();
  const Vector rhs = v.a + v.V.matrix() * ref.mean();
  return lhs.dot(rhs) + (u.V.matrix() * ref.cov().matrix() * v.V.matrix()).trace();
}

double xi_norm(const XiElement& u, const ReferenceMeasure& ref) {
  require_same_dim(u.dim(), ref.dim(), "Xi element and reference dimensions differ");
  // ||a + V m*||^2 + ||V Sigma*^{1/2}||_F^2, a sum of squares.
  const Vector shift = u.a + u.V.matrix() * ref.mean();
  const double quad = (u.V.matrix() * ref.cov_sqrt().matrix()).squaredNorm();
  return std::sqrt(shift.squaredNorm() + quad);
}

XiElement log_map(const GaussianMeasure& mu, const ReferenceMeasure& ref) {
  require_same_dim(mu.dim(), ref.dim(), "measure and reference dimensions differ");
  const SymMatrix s = transport_from_root(ref.cov_sqrt().matrix(), ref.cov_invsqrt().matrix(), mu.cov());
  const Eigen::Index d = mu.dim();
  return {mu.mean() - s.matrix() * ref.mean(), SymMatrix(s.matrix() - Matrix::Identity(d, d))};
}

bool in_range(const XiElement& u) {
  const Eigen::Index d = u.dim();
  const SymEigen e = sym_eigen(SymMatrix(u.V.matrix() + Matrix::Identity(d, d)));
  return d == 0 || e.values(0) >= -psd_tolerance(e.values);
}

GaussianMeasure exp_map(const XiElement& u, const ReferenceMeasure& ref) {
  require_same_dim(u.dim(), ref.dim(), "Xi element and reference dimensions differ");
  if (!in_range(u)) {
    std::ostringstream os;
    os << "V + I has eigenvalue " << min_eigenvalue(SymMatrix(u.V.matrix() + Matrix::Identity(u.dim(), u.dim())));
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  const Matrix shifted = u.V.matrix() + Matrix::Identity(u.dim(), u.dim());
  return GaussianMeasure(u.a + shifted * ref.mean(), SymMatrix(shifted * ref.cov().matrix() * shifted));
}

FrechetResult frechet_mean_detailed(std::span<const GaussianMeasure> measures,
                                    std::optional<std::span<const double>> weights,
                                    const FrechetOptions& options) {
  if (measures.empty()) throw Error(ErrorCode::EmptyInput, "Frechet mean of no measures");
  const std::size_t n = measures.size();
  const Eigen::Index d = measures.front().dim();
  for (const auto& m : measures) require_same_dim(m.dim(), d, "measures have different dimensions");

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (weights) {
    if (weights->size() != n) throw Error(ErrorCode::LengthMismatch, "weights length differs from measures");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!((*weights)[i] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
      w[i] = (*weights)[i];
      total += w[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
  }

  Vector mean = Vector::Zero(d);
  Matrix cov = Matrix::Zero(d, d);
  bool any_spd = false;
  for (std::size_t i = 0; i < n; ++i) {
    mean += w[i] * measures[i].mean();
    cov += w[i] * measures[i].cov().matrix();
    if (w[i] > 0.0 && min_eigenvalue(measures[i].cov()) > kSpdTol) any_spd = true;
  }
  if (!any_spd) throw Error(ErrorCode::DegenerateInput, "no input covariance is positive definite");

  FrechetResult result;
  SymMatrix current(cov);
  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const SymEigen e = sym_eigen(current);
    const Matrix root = recompose(e, [](double v) { return std::sqrt(std::max(v, 0.0)); }).matrix();
    const Matrix invroot = recompose(e, [](double v) { return 1.0 / std::sqrt(v); }).matrix();
    Matrix acc = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      acc += w[i] * sqrt_psd(SymMatrix(root * measures[i].cov().matrix() * root)).matrix();
    }
    SymMatrix next(invroot * acc * acc * invroot);
    const double change = wasserstein_distance(GaussianMeasure(Vector::Zero(d), current),
                                               GaussianMeasure(Vector::Zero(d), next));
    current = std::move(next);
    result.iterations = it;
    if (change <= options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence,
                "Frechet mean iteration did not converge in " + std::to_string(options.max_iterations) + " steps");
  }
  result.mean = GaussianMeasure(mean, current);

  if (min_eigenvalue(current) > kSpdTol) {
    const ReferenceMeasure ref(result.mean);
    XiElement avg = XiElement::zero(d);
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      avg = avg + log_map(measures[i], ref) * w[i];
    }
    result.first_order_residual = xi_norm(avg, ref);
  } else {
    result.first_order_residual = std::numeric_limits<double>::infinity();
  }
  result.first_order_warning = result.first_order_residual > options.first_order_tolerance;
  return result;
}

GaussianMeasure frechet_mean(std::span<const GaussianMeasure> measures,
                             std::optional<std::span<const double>> weights, const FrechetOptions& options) {
  return frechet_mean_detailed(measures, weights, options).mean;
}

}  // namespace gwr
