#pragma once

#include <span>
#include <string>

#include "gwr/tensor.hpp"

namespace gwr {

/// Plug-in sandwich estimate for the identified basic-model coefficients
/// theta = vec*(B).
struct SandwichCovariance {
  /// V^{-1} * meat * V^{-1} / n: estimated covariance of theta_hat.
  Matrix covariance;
  /// Hessian of theta -> mean_i m_theta (constant for the quadratic loss).
  Matrix hessian;
  /// mean_i grad m grad m^T at theta_hat.
  Matrix meat;
  std::size_t n = 0;
  std::string scaling = "covariance = hessian^-1 * meat * hessian^-1 / n";
};

/// m_theta(X, Y) = ||vech*(Y) - vech*(<X, B(theta)>_2)||^2 in the norm of
/// `ref_out`. Throws SingularHessian if the Hessian's condition number exceeds
/// 1e12, InvalidArgument if n does not exceed the parameter dimension.
SandwichCovariance sandwich_covariance(std::span<const XiElement> x, std::span<const XiElement> y,
                                       const Vector& theta_hat, const ReferenceMeasure& ref_out);

}  // namespace gwr
