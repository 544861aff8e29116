#include "gwr/tensor.hpp"

#include <cmath>

#include "gwr/error.hpp"

namespace gwr {

Matrix Tensor4::output_slice(Eigen::Index p, Eigen::Index q) const {
  Matrix m(dims_[2], dims_[3]);
  for (Eigen::Index r = 0; r < dims_[2]; ++r)
    for (Eigen::Index s = 0; s < dims_[3]; ++s) m(r, s) = (*this)(p, q, r, s);
  return m;
}

Matrix Tensor4::input_slice(Eigen::Index r, Eigen::Index s) const {
  Matrix m(dims_[0], dims_[1]);
  for (Eigen::Index p = 0; p < dims_[0]; ++p)
    for (Eigen::Index q = 0; q < dims_[1]; ++q) m(p, q) = (*this)(p, q, r, s);
  return m;
}

void Tensor4::set_input_slice(Eigen::Index r, Eigen::Index s, const Matrix& m) {
  for (Eigen::Index p = 0; p < dims_[0]; ++p)
    for (Eigen::Index q = 0; q < dims_[1]; ++q) (*this)(p, q, r, s) = m(p, q);
}

Tensor4& Tensor4::operator+=(const Tensor4& o) {
  if (dims_ != o.dims_) throw Error(ErrorCode::DimensionMismatch, "tensor shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor4 Tensor4::operator*(double s) const {
  Tensor4 out = *this;
  for (double& v : out.data_) v *= s;
  return out;
}

double Tensor4::max_abs_diff(const Tensor4& o) const {
  if (dims_ != o.dims_) throw Error(ErrorCode::DimensionMismatch, "tensor shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) worst = std::max(worst, std::abs(data_[i] - o.data_[i]));
  return worst;
}

Matrix star_matrix(const Matrix& c) {
  if (c.cols() != c.rows() + 1) throw Error(ErrorCode::DimensionMismatch, "star needs a d x (d+1) matrix");
  Matrix out(c.rows(), c.cols());
  out.col(0) = c.col(0);
  for (Eigen::Index r = 0; r < c.rows(); ++r)
    for (Eigen::Index s = 1; s < c.cols(); ++s) out(r, s) = c(s - 1, r + 1);
  return out;
}

Tensor4 star_tensor(const Tensor4& t) {
  if (t.dim(3) != t.dim(2) + 1) throw Error(ErrorCode::DimensionMismatch, "star needs output modes d x (d+1)");
  Tensor4 out(t.dim(0), t.dim(1), t.dim(2), t.dim(3));
  for (Eigen::Index p = 0; p < t.dim(0); ++p)
    for (Eigen::Index q = 0; q < t.dim(1); ++q)
      for (Eigen::Index r = 0; r < t.dim(2); ++r) {
        out(p, q, r, 0) = t(p, q, r, 0);
        for (Eigen::Index s = 1; s < t.dim(3); ++s) out(p, q, r, s) = t(p, q, s - 1, r + 1);
      }
  return out;
}

bool satisfies_output_symmetry(const Tensor4& t, double tol) {
  for (Eigen::Index p = 0; p < t.dim(0); ++p)
    for (Eigen::Index q = 0; q < t.dim(1); ++q)
      for (Eigen::Index r = 0; r < t.dim(2); ++r)
        for (Eigen::Index s = 1; s < t.dim(3); ++s)
          if (std::abs(t(p, q, r, s) - t(p, q, s - 1, r + 1)) > tol) return false;
  return true;
}

CoefficientTensor::CoefficientTensor(Tensor4 t, double tol) : t_(std::move(t)) {
  if (t_.dim(1) != t_.dim(0) + 1 || t_.dim(3) != t_.dim(2) + 1) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient tensor must be d1 x (d1+1) x d2 x (d2+1)");
  }
  if (!satisfies_output_symmetry(t_, tol)) {
    throw Error(ErrorCode::InvalidArgument, "coefficient tensor violates output symmetry");
  }
}

CoefficientTensor CoefficientTensor::symmetrized(const Tensor4& a) {
  Tensor4 sum = star_tensor(a);
  sum += a;
  return CoefficientTensor(sum * 0.5, 0.0);
}

IdentifiedTensor::IdentifiedTensor(CoefficientTensor b, double tol) : b_(std::move(b)) {
  const Tensor4& t = b_.tensor();
  for (Eigen::Index p = 0; p < t.dim(0); ++p)
    for (Eigen::Index q = p + 2; q < t.dim(1); ++q)
      for (Eigen::Index r = 0; r < t.dim(2); ++r)
        for (Eigen::Index s = 0; s < t.dim(3); ++s)
          if (std::abs(t(p, q, r, s)) > tol) {
            throw Error(ErrorCode::InvalidArgument, "tensor is not lower triangular in its input slices");
          }
}

Matrix contract_matrix(const Matrix& x, const Tensor4& a) {
  if (x.rows() != a.dim(0) || x.cols() != a.dim(1)) {
    throw Error(ErrorCode::DimensionMismatch, "contraction input does not match tensor");
  }
  Matrix out = Matrix::Zero(a.dim(2), a.dim(3));
  for (Eigen::Index p = 0; p < a.dim(0); ++p)
    for (Eigen::Index q = 0; q < a.dim(1); ++q) {
      const double w = x(p, q);
      if (w == 0.0) continue;
      for (Eigen::Index r = 0; r < a.dim(2); ++r)
        for (Eigen::Index s = 0; s < a.dim(3); ++s) out(r, s) += w * a(p, q, r, s);
    }
  return out;
}

XiElement contract(const XiElement& x, const CoefficientTensor& b) {
  require_same_dim(x.dim(), b.d1(), "predictor dimension does not match tensor");
  return XiElement::from_matrix(contract_matrix(x.as_matrix(), b.tensor()));
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> vech_star_positions(Eigen::Index d) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pos;
  pos.reserve(static_cast<std::size_t>(vech_star_size(d)));
  for (Eigen::Index r = 0; r < d; ++r) pos.emplace_back(r, 0);
  for (Eigen::Index c = 1; c <= d; ++c)
    for (Eigen::Index r = c - 1; r < d; ++r) pos.emplace_back(r, c);
  return pos;
}

Vector vech_star(const Matrix& a) {
  if (a.cols() != a.rows() + 1) throw Error(ErrorCode::DimensionMismatch, "vech* needs a d x (d+1) matrix");
  const auto pos = vech_star_positions(a.rows());
  Vector z(static_cast<Eigen::Index>(pos.size()));
  for (std::size_t k = 0; k < pos.size(); ++k) z(static_cast<Eigen::Index>(k)) = a(pos[k].first, pos[k].second);
  return z;
}

Matrix lower_slice_from_vech_star(const Vector& z, Eigen::Index d) {
  if (z.size() != vech_star_size(d)) throw Error(ErrorCode::LengthMismatch, "vech* vector has wrong length");
  const auto pos = vech_star_positions(d);
  Matrix m = Matrix::Zero(d, d + 1);
  for (std::size_t k = 0; k < pos.size(); ++k) m(pos[k].first, pos[k].second) = z(static_cast<Eigen::Index>(k));
  return m;
}

XiElement xi_from_vech_star(const Vector& z, Eigen::Index d) {
  Matrix m = lower_slice_from_vech_star(z, d);
  for (Eigen::Index c = 1; c <= d; ++c)
    for (Eigen::Index r = 0; r < c - 1; ++r) m(r, c) = m(c - 1, r + 1);
  return XiElement::from_matrix(m);
}

Vector vec_star(const IdentifiedTensor& b) {
  const Tensor4& t = b.coefficients().tensor();
  const Eigen::Index p1 = vech_star_size(b.d1());
  const auto out_pos = vech_star_positions(b.d2());
  Vector theta(vec_star_size(b.d1(), b.d2()));
  for (std::size_t k = 0; k < out_pos.size(); ++k) {
    theta.segment(static_cast<Eigen::Index>(k) * p1, p1) =
        vech_star(t.input_slice(out_pos[k].first, out_pos[k].second));
  }
  return theta;
}

IdentifiedTensor tensor_of_theta(const Vector& theta, Eigen::Index d1, Eigen::Index d2) {
  if (theta.size() != vec_star_size(d1, d2)) {
    throw Error(ErrorCode::LengthMismatch, "theta has length " + std::to_string(theta.size()) + ", expected " +
                                               std::to_string(vec_star_size(d1, d2)));
  }
  const Eigen::Index p1 = vech_star_size(d1);
  Tensor4 t = Tensor4::coefficient_shape(d1, d2);
  const auto out_pos = vech_star_positions(d2);
  for (std::size_t k = 0; k < out_pos.size(); ++k) {
    const auto [r, s] = out_pos[k];
    const Matrix slice = lower_slice_from_vech_star(theta.segment(static_cast<Eigen::Index>(k) * p1, p1), d1);
    t.set_input_slice(r, s, slice);
    // Mirror onto the symmetric output entry (s-1, r+1).
    if (s >= 1) t.set_input_slice(s - 1, r + 1, slice);
  }
  return IdentifiedTensor(CoefficientTensor(std::move(t), 0.0), 0.0);
}

Matrix vech_gram(const ReferenceMeasure& ref) {
  const Eigen::Index d = ref.dim();
  const Eigen::Index p = vech_star_size(d);
  std::vector<XiElement> basis;
  basis.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) basis.push_back(xi_from_vech_star(Vector::Unit(p, k), d));
  Matrix g(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i; j < p; ++j) {
      g(i, j) = xi_inner_product(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(j)], ref);
      g(j, i) = g(i, j);
    }
  return g;
}

}  // namespace gwr
