#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gwr/regression.hpp"
#include "gwr/sample_estimation.hpp"
#include "gwr/stats.hpp"

namespace gwr {

using Rng = std::mt19937_64;

/// Simulation tensor for dimension d: slices [., ., r, 0] carry ones in input
/// column 0, slices [., ., r, r+1] carry 1/(2d) on the (p, p+1) diagonal, all
/// other entries zero. Used for both generating models.
CoefficientTensor simulation_tensor(Eigen::Index d);

struct ProposedPair {
  XiElement x;
  XiElement true_y;  // <X, B0>_2 before noise
  GaussianMeasure nu1;
  GaussianMeasure nu2;
  GaussianMeasure truth;  // exp of true_y at N(0, I)
};

/// Tangent-space model at the standard normal reference:
/// X = (G | diag(H)), G ~ N(0,1), H ~ Exp(1); Y = <X, B0>_2 + E with
/// E = (U | diag(V)), U ~ N(0,1), V ~ U(-1/2, 1/2).
ProposedPair generate_proposed_pair(Rng& rng, Eigen::Index d, const CoefficientTensor& b0);

struct AlternativePair {
  GaussianMeasure nu1;
  GaussianMeasure nu2;
  GaussianMeasure truth;  // raw moments <Z, D0>_2
  /// Noise redraws needed because the response covariance was not PSD.
  int redraws = 0;
  /// Set when 100 redraws were not enough and the covariance was projected.
  bool projected = false;
};

/// Raw-moment model: Z = (G | diag(H + 1)) read as (mean, covariance);
/// W = <Z, D0>_2 + E read the same way.
AlternativePair generate_alternative_pair(Rng& rng, Eigen::Index d, const CoefficientTensor& d0);

/// N draws from N(m, S), or from the multivariate t with location m, scale S
/// and `dof` degrees of freedom (Gaussian over sqrt(chi2_dof / dof)).
Matrix draw_samples(Rng& rng, const GaussianMeasure& measure, int count, std::optional<double> dof);

struct ScenarioConfig {
  int d = 2;
  int n = 200;
  int N = 500;  // draws per distribution; 0 = distributions observed directly
  ModelKind model_kind = ModelKind::Basic;
  int rank = 0;
  int runs = 100;
  int new_predictors = 200;
  std::optional<double> t_dof;
  std::uint64_t seed = 1;
  LowRankOptions low_rank;
};

/// Throws InvalidArgument naming the offending field.
void validate(const ScenarioConfig& cfg);

struct MixtureUnit {
  int label = 0;  // 0 = proposed model, 1 = alternative model
  GaussianMeasure nu1;
  GaussianMeasure nu2;
  /// Gaussian the response should be compared against: the noiseless model
  /// output, moment-matched (covariance * dof / (dof - 2)) under t sampling.
  GaussianMeasure truth;
};

struct MixtureDataset {
  std::vector<MixtureUnit> units;
  /// Present when cfg.N > 0.
  std::optional<SampleBlock> predictor_samples;
  std::optional<SampleBlock> response_samples;
  int alternative_projections = 0;
};

/// `count` units from the 50/50 mixture of the two generators; draws samples
/// when cfg.N > 0. Deterministic in (cfg, rng state).
MixtureDataset generate_mixture_dataset(const ScenarioConfig& cfg, Rng& rng, int count);
MixtureDataset generate_mixture_dataset(const ScenarioConfig& cfg);

/// Per-entry least squares of raw response moments on raw predictor moments
/// under the Frobenius norm (basic), or the rank-K analogue.
CoefficientTensor fit_alternative(std::span<const GaussianMeasure> predictors,
                                  std::span<const GaussianMeasure> responses, ModelKind kind = ModelKind::Basic,
                                  int rank = 0, const LowRankOptions& options = {});

struct AlternativePrediction {
  GaussianMeasure measure;
  bool projected = false;
};

/// <Z, D>_2 read as (mean, covariance), with the covariance replaced by its
/// nearest PSD matrix when needed.
AlternativePrediction predict_alternative(const CoefficientTensor& d, const GaussianMeasure& nu1);

/// Mean Wasserstein distance over paired measures.
double awd(std::span<const GaussianMeasure> truths, std::span<const GaussianMeasure> fits);

struct RunRecord {
  int run = 0;
  double awd_proposed = 0.0;
  double awd_alternative = 0.0;
  int projection_count_proposed = 0;
  int projection_count_alternative = 0;
};

RunRecord run_single(const ScenarioConfig& cfg, int run_index);

/// All runs, executed in parallel (GWR_THREADS caps the worker count) and
/// returned in run order.
std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg);

struct ScenarioSummary {
  int runs = 0;
  FiveNumberSummary proposed;
  FiveNumberSummary alternative;
  long projections_proposed = 0;
  long projections_alternative = 0;
  int runs_with_projection_proposed = 0;
  int runs_with_projection_alternative = 0;
};

ScenarioSummary summarize(std::span<const RunRecord> records);

/// Number of worker threads: GWR_THREADS if set and positive, else hardware
/// concurrency.
unsigned worker_threads();

}  // namespace gwr
