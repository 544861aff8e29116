#include "gwr/low_rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "gwr/error.hpp"

namespace gwr {

Tensor4 LowRankFactors::cp_tensor() const {
  Tensor4 t = Tensor4::coefficient_shape(d1(), d2());
  for (Eigen::Index k = 0; k < rank(); ++k)
    for (Eigen::Index p = 0; p < a1.rows(); ++p)
      for (Eigen::Index q = 0; q < a2.rows(); ++q) {
        const double pq = a1(p, k) * a2(q, k);
        for (Eigen::Index r = 0; r < a3.rows(); ++r)
          for (Eigen::Index s = 0; s < a4.rows(); ++s) t(p, q, r, s) += pq * a3(r, k) * a4(s, k);
      }
  return t;
}

CoefficientTensor LowRankFactors::materialize() const { return CoefficientTensor::symmetrized(cp_tensor()); }

namespace {

// vech*((C + C*) / 2) for a d x (d+1) matrix C.
Vector sym_vech(const Matrix& c) { return vech_star(0.5 * (c + star_matrix(c))); }

struct Problem {
  std::vector<Matrix> x;  // d1 x (d1+1) layouts
  std::vector<Vector> y;  // vech* responses
  Matrix gram;            // weighting on vech* coordinates
  Eigen::Index d1 = 0;
  Eigen::Index d2 = 0;
};

Problem make_problem(std::span<const XiElement> x, std::span<const XiElement> y, const ReferenceMeasure& ref_out) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "no training units");
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "predictor and response counts differ");
  Problem prob;
  prob.d1 = x.front().dim();
  prob.d2 = ref_out.dim();
  prob.gram = vech_gram(ref_out);
  for (std::size_t i = 0; i < x.size(); ++i) {
    require_same_dim(x[i].dim(), prob.d1, "predictor dimensions differ");
    require_same_dim(y[i].dim(), prob.d2, "response dimension does not match reference");
    prob.x.push_back(x[i].as_matrix());
    prob.y.push_back(vech_star(y[i]));
  }
  return prob;
}

// w[i](k) = a1_k^T X_i a2_k
std::vector<Vector> component_scores(const Problem& prob, const LowRankFactors& f) {
  std::vector<Vector> w(prob.x.size(), Vector(f.rank()));
  for (std::size_t i = 0; i < prob.x.size(); ++i)
    for (Eigen::Index k = 0; k < f.rank(); ++k) w[i](k) = f.a1.col(k).dot(prob.x[i] * f.a2.col(k));
  return w;
}

// Columns s_k = sym_vech(a3_k a4_k^T).
Matrix output_directions(const LowRankFactors& f) {
  Matrix s(vech_star_size(f.d2()), f.rank());
  for (Eigen::Index k = 0; k < f.rank(); ++k) s.col(k) = sym_vech(f.a3.col(k) * f.a4.col(k).transpose());
  return s;
}

double objective(const Problem& prob, const LowRankFactors& f) {
  const Matrix s = output_directions(f);
  const auto w = component_scores(prob, f);
  double total = 0.0;
  for (std::size_t i = 0; i < prob.x.size(); ++i) {
    const Vector r = prob.y[i] - s * w[i];
    total += r.dot(prob.gram * r);
  }
  return total;
}

// Minimum-norm solution of the symmetric PSD system n x = b. Returns true if
// the matrix was numerically rank deficient.
bool solve_normal(const Matrix& n, const Vector& b, Vector& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(n);
  const Vector& lam = es.eigenvalues();
  const double cutoff = 1e-13 * std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const Vector proj = es.eigenvectors().transpose() * b;
  Vector scaled = Vector::Zero(lam.size());
  bool singular = false;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (lam(j) > cutoff) {
      scaled(j) = proj(j) / lam(j);
    } else {
      singular = true;
    }
  }
  x = es.eigenvectors() * scaled;
  return singular;
}

// Input-side block (A1 or A2): prediction_i = sum_k s_k (u_ik . theta_k), with
// u_ik supplied by `input_vec`.
template <typename InputVec>
bool update_input_block(const Problem& prob, const LowRankFactors& f, Matrix& block, InputVec&& input_vec) {
  const Eigen::Index len = block.rows();
  const Eigen::Index kk = f.rank();
  const Matrix s = output_directions(f);
  const Matrix gs = prob.gram * s;
  const Matrix q = s.transpose() * gs;  // K x K
  Matrix normal = Matrix::Zero(len * kk, len * kk);
  Vector rhs = Vector::Zero(len * kk);
  Vector u(len * kk);
  for (std::size_t i = 0; i < prob.x.size(); ++i) {
    for (Eigen::Index k = 0; k < kk; ++k) u.segment(k * len, len) = input_vec(prob.x[i], k);
    const Vector g = gs.transpose() * prob.y[i];  // s_k^T G y_i
    for (Eigen::Index k = 0; k < kk; ++k) {
      rhs.segment(k * len, len) += g(k) * u.segment(k * len, len);
      for (Eigen::Index k2 = 0; k2 < kk; ++k2) {
        normal.block(k * len, k2 * len, len, len).noalias() +=
            q(k, k2) * u.segment(k * len, len) * u.segment(k2 * len, len).transpose();
      }
    }
  }
  Vector theta;
  const bool singular = solve_normal(normal, rhs, theta);
  for (Eigen::Index k = 0; k < kk; ++k) block.col(k) = theta.segment(k * len, len);
  return singular;
}

// Output-side block (A3 or A4): prediction_i = sum_k w_ik T_k theta_k, where
// the columns of T_k come from `direction(k, j)`.
template <typename Direction>
bool update_output_block(const Problem& prob, const LowRankFactors& f, Matrix& block, Direction&& direction) {
  const Eigen::Index len = block.rows();
  const Eigen::Index kk = f.rank();
  const Eigen::Index p2 = vech_star_size(prob.d2);
  const auto w = component_scores(prob, f);

  Matrix t(p2, len * kk);
  for (Eigen::Index k = 0; k < kk; ++k)
    for (Eigen::Index j = 0; j < len; ++j) t.col(k * len + j) = direction(k, j);
  const Matrix gt = prob.gram * t;
  const Matrix tgt = t.transpose() * gt;

  Matrix ww = Matrix::Zero(kk, kk);
  Matrix wy = Matrix::Zero(p2, kk);  // sum_i w_ik y_i
  for (std::size_t i = 0; i < prob.x.size(); ++i) {
    ww.noalias() += w[i] * w[i].transpose();
    wy.noalias() += prob.y[i] * w[i].transpose();
  }
  Matrix normal(len * kk, len * kk);
  Vector rhs(len * kk);
  for (Eigen::Index k = 0; k < kk; ++k) {
    rhs.segment(k * len, len) = gt.middleCols(k * len, len).transpose() * wy.col(k);
    for (Eigen::Index k2 = 0; k2 < kk; ++k2)
      normal.block(k * len, k2 * len, len, len) = ww(k, k2) * tgt.block(k * len, k2 * len, len, len);
  }
  Vector theta;
  const bool singular = solve_normal(normal, rhs, theta);
  for (Eigen::Index k = 0; k < kk; ++k) block.col(k) = theta.segment(k * len, len);
  return singular;
}

// Moves column norms of a1, a2, a3 into a4. Leaves the tensor unchanged.
void balance(LowRankFactors& f) {
  for (Eigen::Index k = 0; k < f.rank(); ++k) {
    const double n1 = f.a1.col(k).norm();
    const double n2 = f.a2.col(k).norm();
    const double n3 = f.a3.col(k).norm();
    if (n1 == 0.0 || n2 == 0.0 || n3 == 0.0) continue;
    f.a1.col(k) /= n1;
    f.a2.col(k) /= n2;
    f.a3.col(k) /= n3;
    f.a4.col(k) *= n1 * n2 * n3;
  }
}

struct RunResult {
  LowRankFactors factors;
  double objective = 0.0;
  int sweeps = 0;
  int singular_blocks = 0;
  std::vector<double> trace;
};

RunResult run_once(const Problem& prob, LowRankFactors f, const LowRankOptions& options) {
  RunResult out;
  const Eigen::Index d2 = prob.d2;
  double prev = objective(prob, f);
  if (options.record_trace) out.trace.push_back(prev);
  auto record = [&](bool singular) {
    if (singular) ++out.singular_blocks;
    if (options.record_trace) out.trace.push_back(objective(prob, f));
  };
  for (int sweep = 1; sweep <= options.max_iters; ++sweep) {
    record(update_input_block(prob, f, f.a1,
                              [&](const Matrix& x, Eigen::Index k) -> Vector { return x * f.a2.col(k); }));
    record(update_input_block(prob, f, f.a2,
                              [&](const Matrix& x, Eigen::Index k) -> Vector { return x.transpose() * f.a1.col(k); }));
    record(update_output_block(prob, f, f.a3, [&](Eigen::Index k, Eigen::Index r) -> Vector {
      return sym_vech(Vector::Unit(d2, r) * f.a4.col(k).transpose());
    }));
    record(update_output_block(prob, f, f.a4, [&](Eigen::Index k, Eigen::Index s) -> Vector {
      return sym_vech(f.a3.col(k) * Vector::Unit(d2 + 1, s).transpose());
    }));
    balance(f);
    const double cur = objective(prob, f);
    out.sweeps = sweep;
    const double decrease = prev - cur;
    const bool tiny = cur <= 1e-28;
    prev = cur;
    if (tiny || decrease <= options.tol * std::max(cur, std::numeric_limits<double>::min())) break;
  }
  out.objective = prev;
  out.factors = std::move(f);
  return out;
}

}  // namespace

double low_rank_objective(std::span<const XiElement> x, std::span<const XiElement> y, const ReferenceMeasure& ref_out,
                          const LowRankFactors& factors) {
  return objective(make_problem(x, y, ref_out), factors);
}

LowRankFactors canonicalize(LowRankFactors f) {
  auto scale_first = [](auto col) {
    const double lead = col(0);
    const double norm = col.norm();
    if (norm == 0.0 || std::abs(lead) <= 1e-12 * norm) return 1.0;
    col /= lead;
    return lead;
  };
  for (Eigen::Index k = 0; k < f.rank(); ++k) {
    const double c1 = scale_first(f.a1.col(k));
    const double c2 = scale_first(f.a2.col(k));
    const double c3 = scale_first(f.a3.col(k));
    f.a4.col(k) *= c1 * c2 * c3;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(f.rank()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index last = f.a4.rows() - 1;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (f.a4(last, a) != f.a4(last, b)) return f.a4(last, a) > f.a4(last, b);
    for (Eigen::Index s = 0; s < f.a4.rows(); ++s)
      if (f.a4(s, a) != f.a4(s, b)) return f.a4(s, a) > f.a4(s, b);
    return false;
  });
  LowRankFactors out = f;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    out.a1.col(k) = f.a1.col(order[j]);
    out.a2.col(k) = f.a2.col(order[j]);
    out.a3.col(k) = f.a3.col(order[j]);
    out.a4.col(k) = f.a4.col(order[j]);
  }
  return out;
}

LowRankFit fit_low_rank(std::span<const XiElement> x, std::span<const XiElement> y, const ReferenceMeasure& ref_out,
                        int rank, const LowRankOptions& options) {
  if (rank < 1) throw Error(ErrorCode::InvalidArgument, "rank must be >= 1");
  if (options.restarts < 1 || options.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "restarts and max_iters must be positive");
  }
  const Problem prob = make_problem(x, y, ref_out);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(options.init_low, options.init_high);
  auto random_matrix = [&](Eigen::Index rows) {
    Matrix m(rows, rank);
    for (Eigen::Index k = 0; k < rank; ++k)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, k) = unif(rng);
    return m;
  };

  LowRankFit best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < options.restarts; ++attempt) {
    LowRankFactors init{random_matrix(prob.d1), random_matrix(prob.d1 + 1), random_matrix(prob.d2),
                        random_matrix(prob.d2 + 1)};
    RunResult run = run_once(prob, std::move(init), options);
    best.singular_blocks += run.singular_blocks;
    if (run.objective < best.objective) {
      best.objective = run.objective;
      best.factors = std::move(run.factors);
      best.iterations = run.sweeps;
      best.trace = std::move(run.trace);
    }
  }
  best.restarts = options.restarts;
  best.factors = canonicalize(std::move(best.factors));
  return best;
}

}  // namespace gwr
