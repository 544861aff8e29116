#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gwr/matrix_functions.hpp"

namespace gwr {

/// N(mean, cov) with a positive-semidefinite covariance. Eigenvalues that are
/// negative only within psd_tolerance are clipped to zero on construction.
class GaussianMeasure {
 public:
  GaussianMeasure() = default;
  GaussianMeasure(Vector mean, SymMatrix cov);
  GaussianMeasure(Vector mean, const Matrix& cov) : GaussianMeasure(std::move(mean), SymMatrix(cov)) {}

  static GaussianMeasure standard(Eigen::Index d) {
    return GaussianMeasure(Vector::Zero(d), SymMatrix::identity(d));
  }

  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const SymMatrix& cov() const { return cov_; }

 private:
  Vector mean_;
  SymMatrix cov_;
};

/// A nonsingular Gaussian used to anchor the log/exp maps and the inner
/// product on Xi_d. Square root and inverse square root are cached.
class ReferenceMeasure {
 public:
  /// Throws NotPositiveDefinite when the covariance is (near-)singular.
  explicit ReferenceMeasure(GaussianMeasure measure);

  Eigen::Index dim() const { return measure_.dim(); }
  const GaussianMeasure& measure() const { return measure_; }
  const Vector& mean() const { return measure_.mean(); }
  const SymMatrix& cov() const { return measure_.cov(); }
  const SymMatrix& cov_sqrt() const { return cov_sqrt_; }
  const SymMatrix& cov_invsqrt() const { return cov_invsqrt_; }

 private:
  GaussianMeasure measure_;
  SymMatrix cov_sqrt_;
  SymMatrix cov_invsqrt_;
};

/// Element (a, V) of Xi_d: a vector and a symmetric matrix. Laid out as the
/// d x (d+1) matrix whose first column is `a` and remaining block is `V`.
struct XiElement {
  Vector a;
  SymMatrix V;

  static XiElement zero(Eigen::Index d) { return {Vector::Zero(d), SymMatrix::zero(d)}; }
  /// Reads (a | V) from a d x (d+1) matrix; the V block is symmetrized.
  static XiElement from_matrix(const Matrix& m);

  Eigen::Index dim() const { return a.size(); }
  Matrix as_matrix() const;

  XiElement operator+(const XiElement& o) const;
  XiElement operator-(const XiElement& o) const;
  XiElement operator*(double s) const;
};

double wasserstein_distance(const GaussianMeasure& mu1, const GaussianMeasure& mu2);

/// S(sigma1, sigma2) = s1^{-1/2} (s1^{1/2} s2 s1^{1/2})^{1/2} s1^{-1/2}.
SymMatrix transport_coefficient(const SpdMatrix& sigma1, const SymMatrix& sigma2);

/// Optimal transport map from `from` (nonsingular covariance) to `to`, at x.
Vector optimal_transport_apply(const GaussianMeasure& from, const GaussianMeasure& to,
                               const Vector& x);

double xi_inner_product(const XiElement& u, const XiElement& v, const ReferenceMeasure& ref);
double xi_norm(const XiElement& u, const ReferenceMeasure& ref);

/// phi_ref(mu) = (m - S m*, S - I) with S = S(Sigma*, Sigma).
XiElement log_map(const GaussianMeasure& mu, const ReferenceMeasure& ref);
/// xi_ref(a, V) = N(a + (V+I) m*, (V+I) Sigma* (V+I)). Throws OutOfRange
/// when V + I is not positive semidefinite.
GaussianMeasure exp_map(const XiElement& u, const ReferenceMeasure& ref);
/// True iff V + I is positive semidefinite (within psd_tolerance).
bool in_range(const XiElement& u);

struct FrechetOptions {
  double tolerance = 1e-9;        // Wasserstein change between iterates
  int max_iterations = 500;
  double first_order_tolerance = 1e-6;
};

struct FrechetResult {
  GaussianMeasure mean;
  int iterations = 0;
  /// Norm of the weighted average of log maps at the result.
  double first_order_residual = 0.0;
  /// Set when first_order_residual exceeds the configured tolerance.
  bool first_order_warning = false;
};

/// Empirical (weighted) Wasserstein barycenter of Gaussians. The mean part is
/// the weighted Euclidean average; the covariance part is the fixed point of
///   S <- S^{-1/2} (sum_i w_i (S^{1/2} S_i S^{1/2})^{1/2})^2 S^{-1/2},
/// started from the Euclidean average of the covariances.
FrechetResult frechet_mean_detailed(std::span<const GaussianMeasure> measures,
                                    std::optional<std::span<const double>> weights = std::nullopt,
                                    const FrechetOptions& options = {});

GaussianMeasure frechet_mean(std::span<const GaussianMeasure> measures,
                             std::optional<std::span<const double>> weights = std::nullopt,
                             const FrechetOptions& options = {});

}  // namespace gwr
