#include "doctest.h"

#include "gwr/error.hpp"
#include "gwr/tensor.hpp"
#include "oracles.hpp"

using namespace gwr;

namespace {

Tensor4 random_array(std::mt19937_64& rng, int d1, int d2) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor4 t = Tensor4::coefficient_shape(d1, d2);
  for (auto& v : t.data()) v = n(rng);
  return t;
}

oracle::Array4 to_oracle(const Tensor4& t) {
  oracle::Array4 a(static_cast<int>(t.dim(0)), static_cast<int>(t.dim(1)), static_cast<int>(t.dim(2)),
                   static_cast<int>(t.dim(3)));
  a.v = t.data();
  return a;
}

XiElement random_xi(std::mt19937_64& rng, int d) {
  return {oracle::random_vec(rng, d), SymMatrix(oracle::random_spd(rng, d) - Matrix::Identity(d, d))};
}

}  // namespace

TEST_CASE("star_matrix examples") {
  const Matrix one{{1.5, -2.0}};
  CHECK(star_matrix(one) == one);
  const Matrix c{{7.0, 1.0, 2.0}, {8.0, 3.0, 4.0}};
  const Matrix expected{{7.0, 1.0, 3.0}, {8.0, 2.0, 4.0}};
  CHECK(star_matrix(c) == expected);
  CHECK(star_matrix(star_matrix(c)) == c);
  const XiElement sym{Vector::Ones(2), SymMatrix(Matrix{{1.0, 2.0}, {2.0, 5.0}})};
  CHECK(star_matrix(sym.as_matrix()) == sym.as_matrix());
}

TEST_CASE("star_tensor and symmetrization") {
  std::mt19937_64 rng(1);
  CHECK(star_tensor(Tensor4::coefficient_shape(2, 3)).data() == Tensor4::coefficient_shape(2, 3).data());
  for (int d2 = 1; d2 <= 4; ++d2) {
    const Tensor4 a = random_array(rng, 2, d2);
    CHECK(star_tensor(star_tensor(a)).data() == a.data());
    const CoefficientTensor s = CoefficientTensor::symmetrized(a);
    CHECK(satisfies_output_symmetry(s.tensor(), 0.0));
    CHECK(star_tensor(s.tensor()).max_abs_diff(s.tensor()) == 0.0);
  }
  Tensor4 broken = CoefficientTensor::symmetrized(random_array(rng, 2, 2)).tensor();
  broken(0, 0, 0, 2) += 1.0;
  CHECK_FALSE(satisfies_output_symmetry(broken, 1e-12));
  CHECK_THROWS_AS(CoefficientTensor(broken, 1e-12), Error);
}

TEST_CASE("contract examples") {
  const XiElement x{Vector::Constant(2, 0.7), SymMatrix(Matrix{{1.0, 0.5}, {0.5, 2.0}})};
  const XiElement z = contract(x, CoefficientTensor::zero(2, 3));
  CHECK(z.a.isZero());
  CHECK(z.V.matrix().isZero());

  Tensor4 t = Tensor4::coefficient_shape(1, 1);
  const double al = 2.0, be = -1.0, ga = 0.5, de = 3.0;
  t(0, 0, 0, 0) = al;
  t(0, 1, 0, 0) = be;
  t(0, 0, 0, 1) = ga;
  t(0, 1, 0, 1) = de;
  const XiElement x1{Vector::Constant(1, 1.25), SymMatrix(Matrix::Constant(1, 1, -0.5))};
  const XiElement y1 = contract(x1, CoefficientTensor(t));
  CHECK(y1.a(0) == doctest::Approx(al * 1.25 + be * -0.5));
  CHECK(y1.V(0, 0) == doctest::Approx(ga * 1.25 + de * -0.5));

  // Tensor with ones in input column 0 and 1/(2d) on the (p, p+1) diagonal.
  Tensor4 b0 = Tensor4::coefficient_shape(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int p = 0; p < 2; ++p) {
      b0(p, 0, r, 0) = 1.0;
      b0(p, p + 1, r, r + 1) = 0.25;
    }
  const XiElement gh{Vector::Ones(2), SymMatrix::identity(2)};
  const XiElement y = contract(gh, CoefficientTensor(b0));
  const Matrix brute = oracle::contract(gh.as_matrix(), to_oracle(b0));
  for (int r = 0; r < 2; ++r) {
    CHECK(y.a(r) == doctest::Approx(2.0));
    CHECK(y.V(r, r) == doctest::Approx(0.5));
    CHECK(brute(r, 0) == doctest::Approx(2.0));
    CHECK(brute(r, r + 1) == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(contract(x1, CoefficientTensor(b0)), Error);
}

TEST_CASE("contract agrees with brute force and keeps V symmetric") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int d1 = 1 + trial % 3, d2 = 1 + (trial / 3) % 4;
    const CoefficientTensor b = CoefficientTensor::symmetrized(random_array(rng, d1, d2));
    const XiElement x = random_xi(rng, d1);
    const XiElement y = contract(x, b);
    const Matrix brute = oracle::contract(x.as_matrix(), to_oracle(b.tensor()));
    CHECK((y.as_matrix() - brute).norm() < 1e-12);
    const Matrix raw = contract_matrix(x.as_matrix(), b.tensor());
    const Matrix v = raw.rightCols(d2);
    CHECK((v - v.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("vech_star ordering and inverse") {
  const Matrix one{{3.0, 4.0}};
  CHECK(vech_star(one) == Vector{{3.0, 4.0}});
  const Matrix two{{1.0, 11.0, 12.0}, {2.0, 21.0, 22.0}};
  CHECK(vech_star(two) == Vector{{1.0, 2.0, 11.0, 21.0, 22.0}});
  CHECK(vech_star_size(2) == 5);
  std::mt19937_64 rng(4);
  for (int d = 1; d <= 5; ++d) {
    const XiElement x = random_xi(rng, d);
    const XiElement back = xi_from_vech_star(vech_star(x), d);
    CHECK((back.as_matrix() - x.as_matrix()).norm() == 0.0);
  }
  CHECK_THROWS_AS(xi_from_vech_star(Vector::Zero(4), 2), Error);
}

TEST_CASE("vec_star is a bijection onto identified tensors") {
  // Identified coordinates per output slice times identified output slices.
  CHECK(vec_star_size(1, 1) == 4);
  CHECK(vec_star_size(2, 3) == 5 * 9);
  CHECK(vec_star(IdentifiedTensor(CoefficientTensor::zero(2, 2))).isZero());
  CHECK(vec_star(tensor_of_theta(Vector::Zero(25), 2, 2)).isZero());
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 12; ++trial) {
    const int d1 = 1 + trial % 3, d2 = 1 + trial % 4;
    const Vector theta = oracle::random_vec(rng, static_cast<int>(vec_star_size(d1, d2)));
    const IdentifiedTensor b = tensor_of_theta(theta, d1, d2);
    CHECK((vec_star(b) - theta).norm() == 0.0);
    CHECK(tensor_of_theta(vec_star(b), d1, d2).coefficients().tensor().max_abs_diff(b.coefficients().tensor()) == 0.0);
    for (int p = 0; p < d1; ++p)
      for (int q = p + 2; q <= d1; ++q)
        for (int r = 0; r < d2; ++r)
          for (int s = 0; s <= d2; ++s) CHECK(b.coefficients()(p, q, r, s) == 0.0);
  }
  CHECK_THROWS_AS(tensor_of_theta(Vector::Zero(3), 1, 1), Error);
}

TEST_CASE("identified tensors are determined by their contractions") {
  std::mt19937_64 rng(8);
  const int d1 = 3, d2 = 2;
  const IdentifiedTensor a = tensor_of_theta(oracle::random_vec(rng, static_cast<int>(vec_star_size(d1, d2))), d1, d2);
  // Probe with the vech* basis (a spanning set of Xi_d1) and rebuild.
  const Eigen::Index p1 = vech_star_size(d1), p2 = vech_star_size(d2);
  Matrix coef(p1, p2);
  for (Eigen::Index k = 0; k < p1; ++k) {
    const XiElement e = xi_from_vech_star(Vector::Unit(p1, k), d1);
    coef.row(k) = vech_star(contract(e, a.coefficients())).transpose();
  }
  const IdentifiedTensor rebuilt = tensor_of_theta(Eigen::Map<const Vector>(coef.data(), coef.size()), d1, d2);
  CHECK(rebuilt.coefficients().tensor().max_abs_diff(a.coefficients().tensor()) <= 1e-10);
}

TEST_CASE("vech_gram reproduces the reference norm") {
  std::mt19937_64 rng(9);
  for (int d = 1; d <= 4; ++d) {
    const ReferenceMeasure ref(GaussianMeasure(oracle::random_vec(rng, d), oracle::random_spd(rng, d)));
    const Matrix g = vech_gram(ref);
    for (int trial = 0; trial < 5; ++trial) {
      const XiElement x = random_xi(rng, d);
      const Vector z = vech_star(x);
      CHECK(z.dot(g * z) == doctest::Approx(std::pow(xi_norm(x, ref), 2)).epsilon(1e-10));
    }
  }
  const ReferenceMeasure std2(GaussianMeasure::standard(2));
  const Matrix g = vech_gram(std2);
  CHECK(g.diagonal() == Vector{{1.0, 1.0, 1.0, 2.0, 1.0}});
}
