#include "gwr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "gwr/error.hpp"

namespace gwr {

CoefficientTensor simulation_tensor(Eigen::Index d) {
  Tensor4 t = Tensor4::coefficient_shape(d, d);
  const double off = 1.0 / (2.0 * static_cast<double>(d));
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index p = 0; p < d; ++p) {
      t(p, 0, r, 0) = 1.0;
      t(p, p + 1, r, r + 1) = off;
    }
  return CoefficientTensor(std::move(t), 0.0);
}

namespace {

// (first | diag(diagonal))
XiElement diagonal_element(const Vector& first, const Vector& diagonal) {
  return {first, SymMatrix(diagonal.asDiagonal().toDenseMatrix())};
}

XiElement draw_noise(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  Vector u(d), v(d);
  for (Eigen::Index i = 0; i < d; ++i) u(i) = normal(rng);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = unif(rng);
  return diagonal_element(u, v);
}

void draw_predictor_parts(Rng& rng, Eigen::Index d, Vector& g, Vector& h) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  g.resize(d);
  h.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) g(i) = normal(rng);
  for (Eigen::Index i = 0; i < d; ++i) h(i) = expo(rng);
}

GaussianMeasure as_moments(const XiElement& w) { return GaussianMeasure(w.a, w.V); }

// An infinite dof is the Gaussian limit.
bool heavy_tailed(std::optional<double> dof) { return dof && std::isfinite(*dof); }

GaussianMeasure moment_matched(const GaussianMeasure& g, std::optional<double> dof) {
  if (!heavy_tailed(dof)) return g;
  return GaussianMeasure(g.mean(), SymMatrix(g.cov().matrix() * (*dof / (*dof - 2.0))));
}

Rng run_rng(std::uint64_t seed, int run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), 0x9e3779b9u};
  return Rng(seq);
}

}  // namespace

ProposedPair generate_proposed_pair(Rng& rng, Eigen::Index d, const CoefficientTensor& b0) {
  Vector g, h;
  draw_predictor_parts(rng, d, g, h);
  const ReferenceMeasure standard(GaussianMeasure::standard(d));
  XiElement x = diagonal_element(g, h);
  XiElement true_y = contract(x, b0);
  const XiElement y = true_y + draw_noise(rng, d);
  GaussianMeasure nu1 = exp_map(x, standard);
  GaussianMeasure nu2 = exp_map(y, standard);
  GaussianMeasure truth = exp_map(true_y, standard);
  return {std::move(x), std::move(true_y), std::move(nu1), std::move(nu2), std::move(truth)};
}

AlternativePair generate_alternative_pair(Rng& rng, Eigen::Index d, const CoefficientTensor& d0) {
  Vector g, h;
  draw_predictor_parts(rng, d, g, h);
  const XiElement z = diagonal_element(g, h.array() + 1.0);
  const XiElement mean_w = contract(z, d0);

  AlternativePair out;
  out.nu1 = as_moments(z);
  SymMatrix truth_cov = mean_w.V;
  if (min_eigenvalue(truth_cov) < 0.0) truth_cov = project_psd(truth_cov);
  out.truth = GaussianMeasure(mean_w.a, truth_cov);

  constexpr int kMaxRedraws = 100;
  for (int attempt = 0;; ++attempt) {
    const XiElement w = mean_w + draw_noise(rng, d);
    const SymEigen e = sym_eigen(w.V);
    if (e.values(0) >= -psd_tolerance(e.values)) {
      out.nu2 = as_moments(w);
      break;
    }
    if (attempt + 1 >= kMaxRedraws) {
      out.nu2 = GaussianMeasure(w.a, project_psd(w.V));
      out.projected = true;
      break;
    }
    ++out.redraws;
  }
  return out;
}

Matrix draw_samples(Rng& rng, const GaussianMeasure& measure, int count, std::optional<double> dof) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = measure.dim();
  const Matrix root = sqrt_psd(measure.cov()).matrix();
  Matrix out(count, d);
  Vector z(d);
  for (int m = 0; m < count; ++m) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
    double scale = 1.0;
    if (heavy_tailed(dof)) {
      std::chi_squared_distribution<double> chi(*dof);
      scale = 1.0 / std::sqrt(chi(rng) / *dof);
    }
    out.row(m) = (measure.mean() + scale * (root * z)).transpose();
  }
  return out;
}

void validate(const ScenarioConfig& cfg) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "field '" + field + "': " + why);
  };
  if (cfg.d < 1) bad("d", "must be >= 1");
  if (cfg.n < 1) bad("n", "must be >= 1");
  if (cfg.N < 0) bad("N", "must be >= 0 (0 = direct observation)");
  if (cfg.runs < 1) bad("runs", "must be >= 1");
  if (cfg.new_predictors < 1) bad("new_predictors", "must be >= 1");
  if (cfg.t_dof && !(*cfg.t_dof > 2.0)) bad("t_dof", "must be > 2 for a finite covariance");
  if (cfg.model_kind == ModelKind::LowRank && cfg.rank < 1) bad("rank", "low-rank model needs rank >= 1");
  if (cfg.low_rank.restarts < 1) bad("restarts", "must be >= 1");
  if (cfg.low_rank.max_iters < 1) bad("max_iters", "must be >= 1");
}

MixtureDataset generate_mixture_dataset(const ScenarioConfig& cfg, Rng& rng, int count) {
  const Eigen::Index d = cfg.d;
  const CoefficientTensor b0 = simulation_tensor(d);
  std::bernoulli_distribution coin(0.5);

  MixtureDataset out;
  out.units.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int label = coin(rng) ? 1 : 0;
    if (label == 0) {
      ProposedPair p = generate_proposed_pair(rng, d, b0);
      out.units.push_back({0, std::move(p.nu1), std::move(p.nu2), moment_matched(p.truth, cfg.t_dof)});
    } else {
      AlternativePair a = generate_alternative_pair(rng, d, b0);
      if (a.projected) ++out.alternative_projections;
      out.units.push_back({1, std::move(a.nu1), std::move(a.nu2), moment_matched(a.truth, cfg.t_dof)});
    }
  }
  if (cfg.N > 0) {
    SampleBlock pred, resp;
    pred.units.reserve(out.units.size());
    resp.units.reserve(out.units.size());
    for (const auto& u : out.units) {
      pred.units.push_back(draw_samples(rng, u.nu1, cfg.N, cfg.t_dof));
      resp.units.push_back(draw_samples(rng, u.nu2, cfg.N, cfg.t_dof));
    }
    out.predictor_samples = std::move(pred);
    out.response_samples = std::move(resp);
  }
  return out;
}

MixtureDataset generate_mixture_dataset(const ScenarioConfig& cfg) {
  validate(cfg);
  Rng rng = run_rng(cfg.seed, 0);
  return generate_mixture_dataset(cfg, rng, cfg.n);
}

CoefficientTensor fit_alternative(std::span<const GaussianMeasure> predictors,
                                  std::span<const GaussianMeasure> responses, ModelKind kind, int rank,
                                  const LowRankOptions& options) {
  if (predictors.empty()) throw Error(ErrorCode::EmptyInput, "no training units");
  if (predictors.size() != responses.size()) {
    throw Error(ErrorCode::DimensionMismatch, "predictor and response unit counts differ");
  }
  std::vector<XiElement> z, w;
  z.reserve(predictors.size());
  w.reserve(responses.size());
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    z.push_back({predictors[i].mean(), predictors[i].cov()});
    w.push_back({responses[i].mean(), responses[i].cov()});
  }
  // The Frobenius norm on raw moments is the reference norm at N(0, I).
  const ReferenceMeasure frobenius(GaussianMeasure::standard(responses.front().dim()));
  if (kind == ModelKind::Basic) return fit_basic(z, w, frobenius).coefficients();
  return fit_low_rank(z, w, frobenius, rank, options).factors.materialize();
}

AlternativePrediction predict_alternative(const CoefficientTensor& d, const GaussianMeasure& nu1) {
  const XiElement w = contract(XiElement{nu1.mean(), nu1.cov()}, d);
  const SymEigen e = sym_eigen(w.V);
  if (e.values.size() == 0 || e.values(0) >= 0.0) return {GaussianMeasure(w.a, w.V), false};
  return {GaussianMeasure(w.a, project_psd(w.V)), true};
}

double awd(std::span<const GaussianMeasure> truths, std::span<const GaussianMeasure> fits) {
  if (truths.size() != fits.size()) throw Error(ErrorCode::LengthMismatch, "truths and fits differ in length");
  if (truths.empty()) throw Error(ErrorCode::EmptyInput, "AWD of no pairs");
  double total = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) total += wasserstein_distance(truths[i], fits[i]);
  return total / static_cast<double>(truths.size());
}

RunRecord run_single(const ScenarioConfig& cfg, int run_index) {
  Rng rng = run_rng(cfg.seed, run_index);
  const MixtureDataset train = generate_mixture_dataset(cfg, rng, cfg.n);

  std::vector<GaussianMeasure> pred, resp;
  if (cfg.N > 0) {
    pred = empirical_moments(*train.predictor_samples);
    resp = empirical_moments(*train.response_samples);
  } else {
    for (const auto& u : train.units) {
      pred.push_back(moment_matched(u.nu1, cfg.t_dof));
      resp.push_back(moment_matched(u.nu2, cfg.t_dof));
    }
  }

  FitOptions options;
  options.kind = cfg.model_kind;
  options.rank = cfg.rank;
  options.low_rank = cfg.low_rank;
  options.low_rank.seed = rng();
  const FittedModel proposed = fit_from_measures(pred, resp, options);
  const CoefficientTensor alternative = fit_alternative(pred, resp, cfg.model_kind, cfg.rank, options.low_rank);

  const MixtureDataset test = generate_mixture_dataset(cfg, rng, cfg.new_predictors);
  std::vector<GaussianMeasure> truths, fit_p, fit_a;
  RunRecord rec;
  rec.run = run_index;
  for (std::size_t i = 0; i < test.units.size(); ++i) {
    const GaussianMeasure observed = cfg.N > 0 ? empirical_moments(test.predictor_samples->units[i])
                                               : moment_matched(test.units[i].nu1, cfg.t_dof);
    Prediction p = predict(proposed, observed);
    AlternativePrediction a = predict_alternative(alternative, observed);
    rec.projection_count_proposed += p.projected ? 1 : 0;
    rec.projection_count_alternative += a.projected ? 1 : 0;
    truths.push_back(test.units[i].truth);
    fit_p.push_back(std::move(p.measure));
    fit_a.push_back(std::move(a.measure));
  }
  rec.awd_proposed = awd(truths, fit_p);
  rec.awd_alternative = awd(truths, fit_a);
  return rec;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("GWR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunRecord> run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  std::vector<RunRecord> records(static_cast<std::size_t>(cfg.runs));
  const unsigned workers = std::min<unsigned>(worker_threads(), static_cast<unsigned>(cfg.runs));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int r = next++; r < cfg.runs; r = next++) {
      try {
        records[static_cast<std::size_t>(r)] = run_single(cfg, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.runs;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

ScenarioSummary summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no run records");
  ScenarioSummary s;
  s.runs = static_cast<int>(records.size());
  std::vector<double> p, a;
  for (const auto& r : records) {
    p.push_back(r.awd_proposed);
    a.push_back(r.awd_alternative);
    s.projections_proposed += r.projection_count_proposed;
    s.projections_alternative += r.projection_count_alternative;
    s.runs_with_projection_proposed += r.projection_count_proposed > 0 ? 1 : 0;
    s.runs_with_projection_alternative += r.projection_count_alternative > 0 ? 1 : 0;
  }
  s.proposed = five_number_summary(p);
  s.alternative = five_number_summary(a);
  return s;
}

}  // namespace gwr
