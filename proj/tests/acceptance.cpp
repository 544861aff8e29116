// Acceptance checks. Usage: gwr_acceptance <1..11|all> [--cli <gwr>] [--scratch <dir>]
// Prints one PASS/FAIL line per check; exit status is nonzero if any failed.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "gwr/csv.hpp"
#include "gwr/error.hpp"
#include "gwr/inference.hpp"
#include "gwr/low_rank.hpp"
#include "gwr/regression.hpp"
#include "gwr/simulation.hpp"
#include "gwr/stats.hpp"
#include "oracles.hpp"

using namespace gwr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::string cli;
  fs::path scratch;
};

std::string fmt(double v) { return format_real(v); }

GaussianMeasure random_gaussian(std::mt19937_64& rng, int d) {
  return GaussianMeasure(oracle::random_vec(rng, d, 2.0), oracle::random_spd(rng, d, 0.1));
}

// ---- 1: distance to the reference equals the tangent norm ----------------
Outcome isometry(const Context&) {
  std::mt19937_64 rng(101);
  double worst = 0.0, worst_pair = 0.0;
  for (int d : {1, 2, 3, 5}) {
    for (int t = 0; t < 200; ++t) {
      const ReferenceMeasure ref(random_gaussian(rng, d));
      const GaussianMeasure mu = random_gaussian(rng, d);
      worst = std::max(worst, std::abs(wasserstein_distance(mu, ref.measure()) - xi_norm(log_map(mu, ref), ref)));

      const Matrix q = oracle::random_orthogonal(rng, d);
      auto commuting = [&](double lo) {
        const Vector ev = (oracle::random_vec(rng, d).cwiseAbs().array() + lo).matrix();
        return GaussianMeasure(oracle::random_vec(rng, d, 2.0), Matrix(q * ev.asDiagonal() * q.transpose()));
      };
      const ReferenceMeasure cref(commuting(0.1));
      const GaussianMeasure a = commuting(0.0), b = commuting(0.0);
      worst_pair = std::max(worst_pair, std::abs(wasserstein_distance(a, b) -
                                                 xi_norm(log_map(a, cref) - log_map(b, cref), cref)));
    }
  }
  return {worst <= 1e-8 && worst_pair <= 1e-8,
          "max |d - norm| " + fmt(worst) + ", commuting pairs " + fmt(worst_pair) + " (tol 1e-08)"};
}

// ---- 2: exp undoes log ---------------------------------------------------
Outcome round_trip(const Context&) {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int d : {1, 2, 3, 5}) {
    for (int t = 0; t < 200; ++t) {
      const ReferenceMeasure ref(random_gaussian(rng, d));
      const GaussianMeasure mu = random_gaussian(rng, d);
      worst = std::max(worst, wasserstein_distance(mu, exp_map(log_map(mu, ref), ref)));
    }
  }
  return {worst <= 1e-8, "max d(mu, exp(log(mu))) " + fmt(worst) + " (tol 1e-08)"};
}

// ---- 3: barycenter -------------------------------------------------------
Outcome barycenter(const Context&) {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> count(2, 12);
  std::uniform_real_distribution<double> sd(0.1, 4.0);
  double worst_1d = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int k = count(rng);
    std::vector<GaussianMeasure> ms;
    double mean = 0.0, s = 0.0;
    for (int i = 0; i < k; ++i) {
      const double m = oracle::random_vec(rng, 1, 3.0)(0), sigma = sd(rng);
      ms.emplace_back(Vector::Constant(1, m), Matrix::Constant(1, 1, sigma * sigma));
      mean += m / k;
      s += sigma / k;
    }
    const GaussianMeasure b = frechet_mean(ms);
    worst_1d = std::max(worst_1d, oracle::scalar_w(b.mean()(0), std::sqrt(b.cov()(0, 0)), mean, s));
  }
  double worst_fo = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<GaussianMeasure> ms;
    for (int i = 0; i < count(rng); ++i) ms.push_back(random_gaussian(rng, 3));
    if (ms.size() < 2) ms.push_back(random_gaussian(rng, 3));
    const FrechetResult r = frechet_mean_detailed(ms);
    const ReferenceMeasure at(r.mean);
    XiElement avg = XiElement::zero(3);
    for (const auto& m : ms) avg = avg + log_map(m, at) * (1.0 / static_cast<double>(ms.size()));
    worst_fo = std::max(worst_fo, xi_norm(avg, at));
  }
  return {worst_1d <= 1e-6 && worst_fo <= 1e-6,
          "1-d closed form max error " + fmt(worst_1d) + ", 3-d first-order residual " + fmt(worst_fo) + " (tol 1e-06)"};
}

// ---- 4: block relaxation -------------------------------------------------
XiElement tangent_draw(std::mt19937_64& rng, int d, double scale) {
  return {oracle::random_vec(rng, d, scale), SymMatrix(scale * (oracle::random_spd(rng, d) - Matrix::Identity(d, d)))};
}

LowRankFactors uniform_factors(std::mt19937_64& rng, int d1, int d2, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](Eigen::Index r) {
    Matrix m(r, k);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  return {fill(d1), fill(d1 + 1), fill(d2), fill(d2 + 1)};
}

Outcome block_relaxation(const Context&) {
  std::mt19937_64 rng(104);
  const int d = 6, n = 200;
  double worst_rise = -std::numeric_limits<double>::infinity();
  int problems = 0;
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + t % 3;
    const ReferenceMeasure ref(random_gaussian(rng, d));
    const CoefficientTensor truth = uniform_factors(rng, d, d, k).materialize();
    std::vector<XiElement> x, y;
    for (int i = 0; i < n; ++i) {
      x.push_back(tangent_draw(rng, d, 0.5));
      y.push_back(contract(x.back(), truth) + tangent_draw(rng, d, 0.1));
    }
    LowRankOptions opt;
    opt.record_trace = true;
    opt.seed = 1000 + static_cast<std::uint64_t>(t);
    const LowRankFit fit = fit_low_rank(x, y, ref, k, opt);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) worst_rise = std::max(worst_rise, fit.trace[i] - fit.trace[i - 1]);
    ++problems;
  }

  const ReferenceMeasure ref(random_gaussian(rng, d));
  const CoefficientTensor truth = uniform_factors(rng, d, d, 1).materialize();
  std::vector<XiElement> x, y;
  for (int i = 0; i < n; ++i) {
    x.push_back(tangent_draw(rng, d, 0.5));
    y.push_back(contract(x.back(), truth));
  }
  LowRankOptions opt;
  opt.max_iters = 500;
  const LowRankFit rank1 = fit_low_rank(x, y, ref, 1, opt);
  return {worst_rise <= 1e-10 && rank1.objective <= 1e-10,
          std::to_string(problems) + " problems, largest objective increase " + fmt(worst_rise) +
              " (slack 1e-10); noiseless rank-1 objective " + fmt(rank1.objective) + " (tol 1e-10)"};
}

// ---- 5: noiseless basic model --------------------------------------------
Outcome noiseless_recovery(const Context&) {
  Rng rng(105);
  const int d = 2, n = 60;
  const CoefficientTensor b0 = simulation_tensor(d);
  const ReferenceMeasure ref(GaussianMeasure::standard(d));
  std::vector<XiElement> x, y;
  std::vector<GaussianMeasure> nu1, nu2;
  for (int i = 0; i < n; ++i) {
    const ProposedPair p = generate_proposed_pair(rng, d, b0);
    nu1.push_back(p.nu1);
    nu2.push_back(p.truth);
    x.push_back(log_map(p.nu1, ref));
    y.push_back(log_map(p.truth, ref));
  }
  const FittedModel m = fit_model(x, y, ref, ref, ModelKind::Basic);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, wasserstein_distance(predict(m, nu1[static_cast<std::size_t>(i)]).measure, nu2[static_cast<std::size_t>(i)]));
  return {worst <= 1e-8, "max in-sample distance " + fmt(worst) + " (tol 1e-08)"};
}

// ---- 6: in-sample error decays like n^-1/2 --------------------------------
Outcome convergence_rate(const Context&) {
  Rng rng(106);
  const int d = 2;
  const CoefficientTensor b0 = simulation_tensor(d);
  const ReferenceMeasure ref(GaussianMeasure::standard(d));
  // Gaussian noise in vech* coordinates, whitened so E||E||^2 = 1.
  const Matrix gram = vech_gram(ref);
  const Eigen::Index p2 = vech_star_size(d);
  const Matrix whiten = invsqrt_pd(SpdMatrix(gram)).matrix() / std::sqrt(static_cast<double>(p2));
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> log_n, log_r;
  std::ostringstream detail;
  for (int n : {50, 100, 200, 400, 800}) {
    std::vector<double> risks;
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<XiElement> x, y, truth;
      for (int i = 0; i < n; ++i) {
        const ProposedPair p = generate_proposed_pair(rng, d, b0);
        Vector z(p2);
        for (Eigen::Index k = 0; k < p2; ++k) z(k) = normal(rng);
        x.push_back(p.x);
        truth.push_back(p.true_y);
        y.push_back(p.true_y + xi_from_vech_star(whiten * z, d));
      }
      const IdentifiedTensor fit = fit_basic(x, y, ref);
      double sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const GaussianMeasure est = project_and_exp(contract(x[idx], fit.coefficients()), ref).measure;
        const double dw = wasserstein_distance(est, exp_map(truth[idx], ref));
        sq += dw * dw;
      }
      risks.push_back(std::sqrt(sq / n));
    }
    const double med = quantile(risks, 0.5);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_r.push_back(std::log(med));
    detail << "n=" << n << ": " << fmt(med) << "; ";
  }
  const Eigen::Map<const Vector> lx(log_n.data(), static_cast<Eigen::Index>(log_n.size()));
  const Eigen::Map<const Vector> ly(log_r.data(), static_cast<Eigen::Index>(log_r.size()));
  const Vector cx = lx.array() - lx.mean();
  const double slope = cx.dot(ly) / cx.squaredNorm();
  detail << "slope " << fmt(slope) << " (required [-0.65, -0.35])";
  return {slope >= -0.65 && slope <= -0.35, detail.str()};
}

// ---- 7-9: Monte Carlo comparisons ----------------------------------------
ScenarioSummary scenario(ScenarioConfig cfg, std::ostringstream& detail, const std::string& label) {
  const auto records = run_scenario(cfg);
  const ScenarioSummary s = summarize(records);
  detail << label << ": proposed " << fmt(s.proposed.median) << " vs alternative " << fmt(s.alternative.median)
         << " [projected runs " << s.runs_with_projection_proposed << "/" << s.runs_with_projection_alternative << "]; ";
  return s;
}

Outcome mixture_grid_d2(const Context&) {
  std::ostringstream detail;
  bool pass = true;
  std::uint64_t seed = 700;
  for (int n : {50, 200})
    for (int big_n : {50, 500}) {
      ScenarioConfig cfg;
      cfg.d = 2;
      cfg.n = n;
      cfg.N = big_n;
      cfg.runs = 100;
      cfg.seed = seed++;
      const auto s = scenario(cfg, detail, "n=" + std::to_string(n) + ",N=" + std::to_string(big_n));
      pass = pass && s.proposed.median < s.alternative.median;
    }
  return {pass, "median AWD " + detail.str()};
}

Outcome low_rank_d6(const Context&) {
  std::ostringstream detail;
  bool pass = true;
  for (int k : {2, 3, 4}) {
    ScenarioConfig cfg;
    cfg.d = 6;
    cfg.n = 200;
    cfg.N = 500;
    cfg.model_kind = ModelKind::LowRank;
    cfg.rank = k;
    cfg.runs = 50;
    cfg.seed = 800 + static_cast<std::uint64_t>(k);
    const auto s = scenario(cfg, detail, "K=" + std::to_string(k));
    pass = pass && s.proposed.median < s.alternative.median;
  }
  return {pass, "median AWD " + detail.str()};
}

Outcome heavy_tails(const Context&) {
  std::ostringstream detail;
  bool pass = true;
  double previous = std::numeric_limits<double>::infinity();
  for (double dof : {5.0, 10.0, 15.0}) {
    ScenarioConfig cfg;
    cfg.d = 2;
    cfg.n = 200;
    cfg.N = 500;
    cfg.runs = 50;
    cfg.t_dof = dof;
    cfg.seed = 900;
    const auto s = scenario(cfg, detail, "dof=" + fmt(dof));
    pass = pass && s.proposed.median < s.alternative.median && s.proposed.median <= previous;
    previous = s.proposed.median;
  }
  return {pass, "median AWD " + detail.str() + "proposed must also be nonincreasing in dof"};
}

// ---- 10: command-line pipeline -------------------------------------------
int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_pipeline(const Context& ctx) {
  if (ctx.cli.empty()) return {false, "no --cli binary given"};
  const fs::path dir = ctx.scratch / "cli_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string gwr = "\"" + ctx.cli + "\"";
  const std::string q = "\"";
  std::ofstream(dir / "scenario.json") << R"({"d": 2, "n": 40, "N": 200, "runs": 1, "seed": 2718})";
  std::ostringstream why;
  bool pass = true;
  auto step = [&](const std::string& what, const std::string& cmd, int expected) {
    const int rc = run(cmd + " 2>>" + q + (dir / "stderr.txt").string() + q);
    if (rc != expected) {
      pass = false;
      why << what << " exited " << rc << " (expected " << expected << "); ";
    }
  };
  const std::string data = (dir / "data.csv").string();
  step("simulate", gwr + " simulate --config " + q + (dir / "scenario.json").string() + q + " --dataset --out " + q + dir.string() + q, 0);
  step("fit", gwr + " fit " + q + data + q + " --split max-id:30 --out " + q + (dir / "model").string() + q, 0);
  step("predict", gwr + " predict --model " + q + (dir / "model" / "model.json").string() + q + " " + q + data + q +
                      " --split min-id:30 --out " + q + (dir / "pred.csv").string() + q, 0);
  step("eval", gwr + " eval " + q + (dir / "pred.csv").string() + q + " " + q + data + q + " --out " + q +
                   (dir / "eval.csv").string() + q, 0);
  step("eval self", gwr + " eval " + q + (dir / "pred.csv").string() + q + " " + q + (dir / "pred.csv").string() + q +
                        " --out " + q + (dir / "self.csv").string() + q, 0);
  std::ofstream(dir / "broken.json") << "{\"schema_version\": 1, \"kind\": ";
  step("predict with malformed model", gwr + " predict --model " + q + (dir / "broken.json").string() + q + " " + q + data + q +
                                           " --out " + q + (dir / "x.csv").string() + q, 2);
  step("fit on one unit", gwr + " fit " + q + data + q + " --split first:1 --out " + q + (dir / "one").string() + q, 3);
  step("fit lowrank without rank", gwr + " fit " + q + data + q + " --kind lowrank --out " + q + (dir / "lr").string() + q, 2);

  const std::string eval = read_text(dir / "eval.csv"), self = read_text(dir / "self.csv");
  const auto row_of = [](const std::string& text) {
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') last = line;
    return last;
  };
  const std::string row = row_of(eval), zero = row_of(self);
  if (std::count(row.begin(), row.end(), ',') != 6 || row.rfind("wasserstein,10,", 0) != 0) {
    pass = false;
    why << "unexpected summary row '" << row << "'; ";
  }
  if (zero != "wasserstein,10,0,0,0,0,0") {
    pass = false;
    why << "self-evaluation row '" << zero << "' is not all zero; ";
  }
  return {pass, why.str() + "held-out summary: " + row};
}

// ---- 11: sandwich covariance against the OLS robust sandwich --------------
Outcome sandwich(const Context&) {
  std::mt19937_64 rng(111);
  std::normal_distribution<double> n(0.0, 1.0);
  const ReferenceMeasure frob(GaussianMeasure::standard(1));
  double worst = 0.0;
  for (int set = 0; set < 20; ++set) {
    const int count = 25 + 5 * set;
    std::vector<XiElement> x, y;
    Matrix f(count, 2);
    Vector ya(count), yv(count);
    for (int i = 0; i < count; ++i) {
      const double a = n(rng), v = n(rng), scale = 0.3 + std::abs(v);
      ya(i) = 0.7 * a + 0.2 * v + scale * n(rng);
      yv(i) = -a + 1.5 * v + scale * n(rng);
      x.push_back({Vector::Constant(1, a), SymMatrix(Matrix::Constant(1, 1, v))});
      y.push_back({Vector::Constant(1, ya(i)), SymMatrix(Matrix::Constant(1, 1, yv(i)))});
      f.row(i) << a, v;
    }
    const Vector theta = vec_star(fit_basic(x, y, frob));
    const SandwichCovariance s = sandwich_covariance(x, y, theta, frob);
    const auto ra = oracle::ols_sandwich(f, ya), rv = oracle::ols_sandwich(f, yv);
    const Matrix xtx_inv = (f.transpose() * f).inverse();
    Matrix cross = Matrix::Zero(2, 2);
    const Vector ea = ya - f * ra.beta, ev = yv - f * rv.beta;
    for (int i = 0; i < count; ++i) cross += ea(i) * ev(i) * f.row(i).transpose() * f.row(i);
    Matrix expected(4, 4);
    expected << ra.sandwich, xtx_inv * cross * xtx_inv, xtx_inv * cross * xtx_inv, rv.sandwich;
    worst = std::max(worst, (s.covariance - expected).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "20 datasets, max entrywise difference " + fmt(worst) + " (tol 1e-08)"};
}

struct Check {
  int number;
  const char* name;
  double limit_seconds;
  std::function<Outcome(const Context&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Check> checks{
      {1, "isometry", 10, isometry},
      {2, "round_trip", 10, round_trip},
      {3, "barycenter", 30, barycenter},
      {4, "block_relaxation", 0, block_relaxation},
      {5, "noiseless_recovery", 0, noiseless_recovery},
      {6, "convergence_rate", 300, convergence_rate},
      {7, "mixture_grid_d2", 900, mixture_grid_d2},
      {8, "low_rank_d6", 1800, low_rank_d6},
      {9, "heavy_tails", 900, heavy_tails},
      {10, "cli_pipeline", 0, cli_pipeline},
      {11, "sandwich", 0, sandwich},
  };
  std::string which = "all";
  Context ctx{"", fs::temp_directory_path() / "gwr_acceptance"};
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) ctx.cli = argv[++i];
    else if (a == "--scratch" && i + 1 < argc) ctx.scratch = argv[++i];
    else which = a;
  }

  bool all_pass = true;
  int ran = 0;
  for (const auto& c : checks) {
    if (which != "all" && which != std::to_string(c.number)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f s", secs);
    std::string timing = buf;
    if (c.limit_seconds > 0) {
      timing += ", limit " + fmt(c.limit_seconds) + " s";
      if (secs > c.limit_seconds) {
        o.pass = false;
        timing += " EXCEEDED";
      }
    }
    std::printf("criterion %d %s: %s  %s [%s]\n", c.number, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
