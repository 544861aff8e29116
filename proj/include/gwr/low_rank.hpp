#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gwr/tensor.hpp"

namespace gwr {

/// Factors of A = [[A1, A2, A3, A4]] (sum of K rank-one terms). The
/// coefficient tensor they represent is (A + A*) / 2.
struct LowRankFactors {
  Matrix a1;  // d1 x K
  Matrix a2;  // (d1+1) x K
  Matrix a3;  // d2 x K
  Matrix a4;  // (d2+1) x K

  Eigen::Index rank() const { return a1.cols(); }
  Eigen::Index d1() const { return a1.rows(); }
  Eigen::Index d2() const { return a3.rows(); }

  /// The raw CP tensor A.
  Tensor4 cp_tensor() const;
  CoefficientTensor materialize() const;
};

struct LowRankOptions {
  int restarts = 5;
  int max_iters = 100;  // sweeps over the four blocks
  double tol = 1e-8;    // relative objective decrease between sweeps
  double init_low = -1.0;
  double init_high = 1.0;
  std::uint64_t seed = 0x5eed;
  /// Keep the objective after every block update of the returned restart.
  bool record_trace = false;
};

struct LowRankFit {
  LowRankFactors factors;
  double objective = 0.0;
  int iterations = 0;  // sweeps used by the returned restart
  int restarts = 0;
  int singular_blocks = 0;
  std::vector<double> trace;
};

/// Block relaxation: cyclically minimizes the weighted least-squares loss over
/// A1, A2, A3, A4 with the others fixed. Each block subproblem is solved
/// exactly (minimum-norm when its normal matrix is rank deficient). Returns the
/// best of `options.restarts` random starts, canonicalized.
LowRankFit fit_low_rank(std::span<const XiElement> x, std::span<const XiElement> y, const ReferenceMeasure& ref_out,
                        int rank, const LowRankOptions& options = {});

/// Loss of the factors on tangent data: sum_i ||Y_i - <X_i, B>_2||^2.
double low_rank_objective(std::span<const XiElement> x, std::span<const XiElement> y,
                          const ReferenceMeasure& ref_out, const LowRankFactors& factors);

/// Rescales each component so the first entries of a1, a2, a3 are one
/// (absorbing the scale into a4) and orders components by the last entry of a4,
/// descending; ties broken lexicographically on the a4 column. The
/// materialized tensor is unchanged.
LowRankFactors canonicalize(LowRankFactors factors);

}  // namespace gwr
