#include "gwr/commands.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gwr/csv.hpp"
#include "gwr/error.hpp"
#include "gwr/model_io.hpp"
#include "gwr/sample_estimation.hpp"
#include "gwr/simulation.hpp"

namespace gwr {

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

void emit(const std::optional<std::string>& path, std::ostream& fallback, const std::string& text) {
  if (path) write_file(*path, text);
  else fallback << text;
}

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidArgument, what + ": '" + s + "' is not a number");
  }
  return v;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::vector<std::string> apply_split(const std::vector<std::string>& units, const std::string& rule) {
  if (rule == "all") return units;
  const auto colon = rule.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "unknown split rule '" + rule + "'");
  const std::string name = rule.substr(0, colon);
  const std::string arg = rule.substr(colon + 1);
  std::vector<std::string> out;
  if (name == "first" || name == "rest") {
    const double k = parse_number(arg, "split " + name);
    if (k < 0 || k != static_cast<double>(static_cast<long>(k))) {
      throw Error(ErrorCode::InvalidArgument, "split " + name + " needs a nonnegative integer");
    }
    const auto cut = std::min(units.size(), static_cast<std::size_t>(k));
    if (name == "first") out.assign(units.begin(), units.begin() + static_cast<long>(cut));
    else out.assign(units.begin() + static_cast<long>(cut), units.end());
    return out;
  }
  if (name == "max-id" || name == "min-id") {
    const double v = parse_number(arg, "split " + name);
    for (const auto& id : units) {
      const double x = parse_number(id, "unit_id under split " + name);
      if (name == "max-id" ? x <= v : x > v) out.push_back(id);
    }
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown split rule '" + rule + "'");
}

void cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
  const std::string started = utc_timestamp();
  if (opt.config_path && opt.preset) {
    throw Error(ErrorCode::InvalidArgument, "--config and --preset are mutually exclusive");
  }
  ScenarioConfig cfg;
  if (opt.config_path) {
    cfg = scenario_from_json(slurp(*opt.config_path), *opt.config_path);
  } else if (opt.preset) {
    cfg = preset(*opt.preset);
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.kind) cfg.model_kind = *opt.kind;
  if (opt.rank) cfg.rank = *opt.rank;
  if (opt.runs) cfg.runs = *opt.runs;
  validate(cfg);

  const std::string canonical = scenario_to_json(cfg);
  const fs::path out(opt.out_dir);
  Manifest manifest{"simulate", fnv1a(canonical), cfg.seed, started, {}};

  if (opt.dataset_only) {
    if (cfg.N < 1) throw Error(ErrorCode::InvalidArgument, "dataset output needs N >= 1 draws per distribution");
    const MixtureDataset ds = generate_mixture_dataset(cfg);
    LongFormatData data;
    data.predictor_dim = data.response_dim = cfg.d;
    for (std::size_t i = 0; i < ds.units.size(); ++i) {
      const std::string id = std::to_string(i + 1);
      data.unit_order.push_back(id);
      data.predictors.emplace(id, ds.predictor_samples->units[i]);
      data.responses.emplace(id, ds.response_samples->units[i]);
    }
    std::ostringstream csv;
    write_long_format(csv, data);
    write_file(out / "data.csv", csv.str());
    manifest.command = "simulate --dataset";
    manifest.finished_at = utc_timestamp();
    write_file(out / "manifest.json", manifest_json(manifest));
    log << "wrote " << ds.units.size() << " units to " << (out / "data.csv").string() << '\n';
    return;
  }

  const auto records = run_scenario(cfg);
  const ScenarioSummary summary = summarize(records);
  write_file(out / "runs.csv", run_records_csv(records));
  write_file(out / "summary.json", summary_json(cfg, summary));
  manifest.finished_at = utc_timestamp();
  write_file(out / "manifest.json", manifest_json(manifest));
  log << "runs=" << summary.runs << " median_awd proposed=" << format_real(summary.proposed.median)
      << " alternative=" << format_real(summary.alternative.median) << '\n';
}

void cmd_fit(const FitCommandOptions& opt, std::ostream& log) {
  const std::string started = utc_timestamp();
  if (opt.kind == ModelKind::LowRank && !opt.rank) throw Error(ErrorCode::InvalidArgument, "--kind lowrank requires --rank");
  if (opt.rank && *opt.rank < 1) throw Error(ErrorCode::InvalidArgument, "--rank must be >= 1");

  const std::string raw = slurp(opt.data_path);
  std::istringstream in(raw);
  const LongFormatData data = read_long_format(in, opt.data_path);
  const auto units = apply_split(data.unit_order, opt.split);
  if (units.empty()) throw Error(ErrorCode::InvalidArgument, "split '" + opt.split + "' selects no units");
  require_both_roles(data, units);
  if (units.size() < 2 && !opt.allow_single_unit) {
    throw Error(ErrorCode::DegenerateReference,
                "training split has a single unit; its Frechet means carry no spread (use --allow-single-unit)");
  }

  SampleBlock pred, resp;
  for (const auto& id : units) {
    pred.units.push_back(data.predictors.at(id));
    resp.units.push_back(data.responses.at(id));
  }
  std::optional<Standardization> s_in, s_out;
  if (opt.standardize) {
    s_in = Standardization::fit(pred.units);
    s_out = Standardization::fit(resp.units);
    for (auto& m : pred.units) m = s_in->apply(m);
    for (auto& m : resp.units) m = s_out->apply(m);
  }

  FitOptions fo;
  fo.kind = opt.kind;
  fo.rank = opt.rank.value_or(0);
  fo.low_rank.seed = opt.seed;
  StoredModel stored{fit_from_samples(pred, resp, fo), s_in, s_out};

  const fs::path out(opt.out_dir);
  write_file(out / "model.json", model_to_json(stored));
  std::ostringstream canon;
  canon << "fit kind=" << to_string(opt.kind) << " rank=" << fo.rank << " split=" << opt.split
        << " standardize=" << opt.standardize << " data=" << hex64(fnv1a(raw));
  write_file(out / "manifest.json", manifest_json({"fit", fnv1a(canon.str()), opt.seed, started, utc_timestamp()}));
  log << "fitted " << to_string(opt.kind) << " model on " << units.size() << " units, objective "
      << format_real(stored.model.diagnostics.objective) << '\n';
  if (stored.model.diagnostics.frechet_warning) log << "warning: Frechet mean first-order residual above tolerance\n";
}

void cmd_predict(const PredictOptions& opt, std::ostream& log) {
  StoredModel stored = model_from_json(slurp(opt.model_path));
  const FittedModel& model = stored.model;

  std::vector<std::pair<std::string, GaussianMeasure>> inputs;
  if (detect_layout(opt.data_path) == CsvLayout::Long) {
    const LongFormatData data = read_long_format_file(opt.data_path);
    for (const auto& id : apply_split(data.unit_order, opt.split)) {
      auto it = data.predictors.find(id);
      if (it == data.predictors.end()) continue;
      const Matrix rows = stored.standardize_in ? stored.standardize_in->apply(it->second) : it->second;
      inputs.emplace_back(id, empirical_moments(rows));
    }
  } else {
    if (stored.standardize_in) {
      throw Error(ErrorCode::InvalidArgument, "a standardized model needs raw long-format observations");
    }
    std::ifstream in(opt.data_path);
    std::vector<std::string> ids;
    auto rows = read_measures(in, opt.data_path);
    for (const auto& r : rows) ids.push_back(r.unit_id);
    const auto keep = apply_split(ids, opt.split);
    for (auto& r : rows)
      if (std::find(keep.begin(), keep.end(), r.unit_id) != keep.end()) inputs.emplace_back(r.unit_id, r.measure);
  }
  if (inputs.empty()) throw Error(ErrorCode::InvalidArgument, "no predictor units selected");

  std::vector<MeasureRow> out;
  int projected = 0;
  for (const auto& [id, nu1] : inputs) {
    require_same_dim(nu1.dim(), model.ref_in.dim(), "predictor dimension");
    Prediction p = predict(model, nu1);
    projected += p.projected ? 1 : 0;
    GaussianMeasure m = stored.standardize_out ? stored.standardize_out->restore(p.measure) : p.measure;
    out.push_back({id, std::move(m), p.projected, p.eta});
  }
  std::ostringstream csv;
  write_measures(csv, out);
  write_file(opt.out_path, csv.str());
  log << "predicted " << out.size() << " units (" << projected << " projected)\n";
}

void cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const auto predicted = read_role_measures(opt.predicted_path, "response");
  const auto observed = read_role_measures(opt.observed_path, "response");
  std::map<std::string, const GaussianMeasure*> by_id;
  for (const auto& r : observed) by_id[r.unit_id] = &r.measure;

  std::vector<double> dist;
  for (const auto& r : predicted) {
    auto it = by_id.find(r.unit_id);
    if (it == by_id.end()) throw Error(ErrorCode::Parse, "unit '" + r.unit_id + "' has no observed response");
    require_same_dim(it->second->dim(), r.measure.dim(), "response dimension");
    dist.push_back(wasserstein_distance(r.measure, *it->second));
  }
  const FiveNumberSummary s = five_number_summary(dist);
  std::ostringstream t;
  t << "# quantiles: linear interpolation between order statistics, h = (n - 1) p\n"
    << "label,n,min,q25,median,q75,max\n"
    << opt.label << ',' << dist.size() << ',' << format_real(s.min) << ',' << format_real(s.q25) << ','
    << format_real(s.median) << ',' << format_real(s.q75) << ',' << format_real(s.max) << '\n';
  emit(opt.out_path, out, t.str());
}

void cmd_barycenter(const BarycenterOptions& opt, std::ostream& out) {
  if (opt.role != "predictor" && opt.role != "response") {
    throw Error(ErrorCode::InvalidArgument, "role must be predictor or response");
  }
  const auto rows = read_role_measures(opt.data_path, opt.role);
  std::vector<GaussianMeasure> measures;
  for (const auto& r : rows) measures.push_back(r.measure);
  const FrechetResult res = frechet_mean_detailed(measures);
  std::ostringstream csv;
  write_measures(csv, {{"barycenter", res.mean, std::nullopt, std::nullopt}});
  emit(opt.out_path, out, csv.str());
}

}  // namespace gwr
