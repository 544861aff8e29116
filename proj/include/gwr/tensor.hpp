#pragma once

#include <array>
#include <utility>
#include <vector>

#include "gwr/gaussian.hpp"

namespace gwr {

/// Dense 4-way array, row-major in (p, q, r, s). Indices are 0-based.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3, Eigen::Index n4)
      : dims_{n1, n2, n3, n4}, data_(static_cast<std::size_t>(n1 * n2 * n3 * n4), 0.0) {}

  /// Shape d1 x (d1+1) x d2 x (d2+1) used by coefficient tensors.
  static Tensor4 coefficient_shape(Eigen::Index d1, Eigen::Index d2) {
    return Tensor4(d1, d1 + 1, d2, d2 + 1);
  }

  const std::array<Eigen::Index, 4>& dims() const { return dims_; }
  Eigen::Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }

  double& operator()(Eigen::Index p, Eigen::Index q, Eigen::Index r, Eigen::Index s) {
    return data_[offset(p, q, r, s)];
  }
  double operator()(Eigen::Index p, Eigen::Index q, Eigen::Index r, Eigen::Index s) const {
    return data_[offset(p, q, r, s)];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Slice [p, q, ., .] as an n3 x n4 matrix.
  Matrix output_slice(Eigen::Index p, Eigen::Index q) const;
  /// Slice [., ., r, s] as an n1 x n2 matrix.
  Matrix input_slice(Eigen::Index r, Eigen::Index s) const;
  void set_input_slice(Eigen::Index r, Eigen::Index s, const Matrix& m);

  Tensor4& operator+=(const Tensor4& o);
  Tensor4 operator*(double s) const;
  double max_abs_diff(const Tensor4& o) const;

 private:
  std::size_t offset(Eigen::Index p, Eigen::Index q, Eigen::Index r, Eigen::Index s) const {
    return static_cast<std::size_t>(((p * dims_[1] + q) * dims_[2] + r) * dims_[3] + s);
  }

  std::array<Eigen::Index, 4> dims_{0, 0, 0, 0};
  std::vector<double> data_;
};

/// C*[r, 0] = C[r, 0]; C*[r, s] = C[s-1, r+1] for s >= 1. An involution on
/// d x (d+1) matrices that transposes the V block.
Matrix star_matrix(const Matrix& c);
/// Slice-wise star over the output modes.
Tensor4 star_tensor(const Tensor4& t);

/// Coefficient tensor of shape d1 x (d1+1) x d2 x (d2+1) whose output slices
/// satisfy B[., ., r, s] == B[., ., s-1, r+1], so contractions land in Xi_{d2}.
class CoefficientTensor {
 public:
  CoefficientTensor() = default;
  /// Validates the output symmetry (entrywise within `tol`).
  explicit CoefficientTensor(Tensor4 t, double tol = 1e-12);

  static CoefficientTensor zero(Eigen::Index d1, Eigen::Index d2) {
    return CoefficientTensor(Tensor4::coefficient_shape(d1, d2));
  }
  /// (A + A*) / 2 for an arbitrary coefficient-shaped array.
  static CoefficientTensor symmetrized(const Tensor4& a);

  Eigen::Index d1() const { return t_.dim(0); }
  Eigen::Index d2() const { return t_.dim(2); }
  const Tensor4& tensor() const { return t_; }
  double operator()(Eigen::Index p, Eigen::Index q, Eigen::Index r, Eigen::Index s) const {
    return t_(p, q, r, s);
  }

 private:
  Tensor4 t_;
};

/// Coefficient tensor in the identified space: every output slice is zero at
/// input positions q >= p + 2 (the strict upper part of the V block).
class IdentifiedTensor {
 public:
  IdentifiedTensor() = default;
  explicit IdentifiedTensor(CoefficientTensor b, double tol = 1e-12);

  const CoefficientTensor& coefficients() const { return b_; }
  Eigen::Index d1() const { return b_.d1(); }
  Eigen::Index d2() const { return b_.d2(); }

 private:
  CoefficientTensor b_;
};

bool satisfies_output_symmetry(const Tensor4& t, double tol);

/// <X, A>_2[r, s] = sum_{p,q} X[p, q] A[p, q, r, s].
Matrix contract_matrix(const Matrix& x, const Tensor4& a);
XiElement contract(const XiElement& x, const CoefficientTensor& b);

// ---- half-vectorization -------------------------------------------------

/// d(d+3)/2
inline Eigen::Index vech_star_size(Eigen::Index d) { return d * (d + 3) / 2; }

/// (row, col) of each vech* coordinate in a d x (d+1) matrix: column 0 in
/// full, then for column c >= 1 rows c-1 .. d-1.
std::vector<std::pair<Eigen::Index, Eigen::Index>> vech_star_positions(Eigen::Index d);

Vector vech_star(const Matrix& a);
inline Vector vech_star(const XiElement& x) { return vech_star(x.as_matrix()); }
/// Inverse of vech_star onto Xi_d (the V block is filled symmetrically).
XiElement xi_from_vech_star(const Vector& z, Eigen::Index d);
/// Inverse of vech_star onto lower-triangular slices (upper V part zero).
Matrix lower_slice_from_vech_star(const Vector& z, Eigen::Index d);

/// Length of vec*(B): vech_star_size(d1) * vech_star_size(d2).
inline Eigen::Index vec_star_size(Eigen::Index d1, Eigen::Index d2) {
  return vech_star_size(d1) * vech_star_size(d2);
}
/// Concatenates vech*(B[., ., r, s]) over the output coordinates (r, s) in
/// vech* order.
Vector vec_star(const IdentifiedTensor& b);
/// Throws LengthMismatch if theta has the wrong length.
IdentifiedTensor tensor_of_theta(const Vector& theta, Eigen::Index d1, Eigen::Index d2);

/// Gram matrix G of the reference inner product on vech* coordinates:
/// z^T G z == ||xi_from_vech_star(z)||^2. Off-diagonal V coordinates stand for
/// both symmetric entries.
Matrix vech_gram(const ReferenceMeasure& ref);

}  // namespace gwr
