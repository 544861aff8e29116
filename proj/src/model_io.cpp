#include "gwr/model_io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include "json.hpp"

#include "gwr/csv.hpp"
#include "gwr/error.hpp"

namespace gwr {

using nlohmann::json;

namespace {

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json measure_json(const GaussianMeasure& g) { return {{"mean", vector_json(g.mean())}, {"cov", matrix_json(g.cov().matrix())}}; }

[[noreturn]] void bad_model(const std::string& what) { throw Error(ErrorCode::Parse, "model: " + what); }

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) bad_model(std::string("missing field '") + name + "'");
  return j.at(name);
}

Vector vector_of(const json& j, const char* what) {
  if (!j.is_array()) bad_model(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad_model(std::string(what) + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_of(const json& j, const char* what) {
  if (!j.is_array()) bad_model(std::string(what) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vector_of(j[static_cast<std::size_t>(i)], what);
    if (r.size() != cols) bad_model(std::string(what) + " has ragged rows");
    m.row(i) = r.transpose();
  }
  return m;
}

GaussianMeasure measure_of(const json& j, const char* what) {
  Vector m = vector_of(field(j, "mean"), what);
  Matrix c = matrix_of(field(j, "cov"), what);
  if (c.rows() != m.size() || c.cols() != m.size()) bad_model(std::string(what) + " has inconsistent dimensions");
  return GaussianMeasure(std::move(m), SymMatrix(c));
}

json standardization_json(const std::optional<Standardization>& s) {
  if (!s) return nullptr;
  return {{"shift", vector_json(s->shift)}, {"scale", vector_json(s->scale)}};
}

std::optional<Standardization> standardization_of(const json& j, const char* what) {
  if (j.is_null()) return std::nullopt;
  Standardization s{vector_of(field(j, "shift"), what), vector_of(field(j, "scale"), what)};
  if (s.shift.size() != s.scale.size() || (s.scale.array() <= 0.0).any()) bad_model(std::string(what) + " is invalid");
  return s;
}

double rounded(double v) { return std::stod(format_real(v)); }

long line_of_offset(std::string_view text, std::size_t offset) {
  long line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n' ? 1 : 0;
  return line;
}

}  // namespace

Standardization Standardization::fit(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::EmptyInput, "no observations to standardize");
  const Eigen::Index d = blocks.front().cols();
  Vector sum = Vector::Zero(d), sq = Vector::Zero(d);
  double count = 0.0;
  for (const auto& b : blocks) {
    require_same_dim(b.cols(), d, "observation width");
    sum += b.colwise().sum().transpose();
    count += static_cast<double>(b.rows());
  }
  if (count == 0.0) throw Error(ErrorCode::EmptyInput, "no observations to standardize");
  const Vector mean = sum / count;
  for (const auto& b : blocks) sq += (b.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  Vector scale = (sq / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(scale(i) > 0.0)) scale(i) = 1.0;
  return {mean, scale};
}

Matrix Standardization::apply(const Matrix& rows) const {
  require_same_dim(rows.cols(), shift.size(), "observation width");
  return (rows.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array();
}

GaussianMeasure Standardization::restore(const GaussianMeasure& m) const {
  const auto s = scale.asDiagonal();
  return GaussianMeasure(Vector(s * m.mean() + shift), SymMatrix(s * m.cov().matrix() * s));
}

std::string model_to_json(const StoredModel& stored) {
  const FittedModel& m = stored.model;
  const auto& t = m.tensor.tensor();
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = std::string(to_string(m.kind));
  j["d1"] = m.tensor.d1();
  j["d2"] = m.tensor.d2();
  j["rank"] = m.rank;
  j["index_order"] = "row-major (p, q, r, s); shape d1 x (d1+1) x d2 x (d2+1)";
  j["tensor"] = t.data();
  if (m.factors) {
    j["factors"] = {{"a1", matrix_json(m.factors->a1)},
                    {"a2", matrix_json(m.factors->a2)},
                    {"a3", matrix_json(m.factors->a3)},
                    {"a4", matrix_json(m.factors->a4)}};
  } else {
    j["factors"] = nullptr;
  }
  j["ref_in"] = measure_json(m.ref_in.measure());
  j["ref_out"] = measure_json(m.ref_out.measure());
  const auto& dg = m.diagnostics;
  j["diagnostics"] = {{"iterations", dg.iterations},           {"objective", dg.objective},
                      {"restarts", dg.restarts},               {"singular_blocks", dg.singular_blocks},
                      {"boundary_projections", dg.boundary_projections}, {"frechet_warning", dg.frechet_warning}};
  j["standardize_in"] = standardization_json(stored.standardize_in);
  j["standardize_out"] = standardization_json(stored.standardize_out);
  return j.dump(2) + "\n";
}

StoredModel model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad_model(std::string("invalid JSON at line ") + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  try {
    const json& version = field(j, "schema_version");
    if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
      bad_model("unsupported schema_version " + version.dump());
    }
    const ModelKind kind = parse_model_kind(field(j, "kind").get<std::string>());
    const auto d1 = field(j, "d1").get<Eigen::Index>();
    const auto d2 = field(j, "d2").get<Eigen::Index>();
    const int rank = field(j, "rank").get<int>();
    if (d1 < 1 || d2 < 1) bad_model("dimensions must be positive");
    Tensor4 t = Tensor4::coefficient_shape(d1, d2);
    const auto data = field(j, "tensor").get<std::vector<double>>();
    if (data.size() != t.data().size()) bad_model("tensor has " + std::to_string(data.size()) + " entries, expected " + std::to_string(t.data().size()));
    t.data() = data;

    std::optional<LowRankFactors> factors;
    if (const json& f = field(j, "factors"); !f.is_null()) {
      factors = LowRankFactors{matrix_of(field(f, "a1"), "a1"), matrix_of(field(f, "a2"), "a2"),
                               matrix_of(field(f, "a3"), "a3"), matrix_of(field(f, "a4"), "a4")};
    }
    ReferenceMeasure ref_in(measure_of(field(j, "ref_in"), "ref_in"));
    ReferenceMeasure ref_out(measure_of(field(j, "ref_out"), "ref_out"));
    if (ref_in.dim() != d1 || ref_out.dim() != d2) bad_model("reference dimensions disagree with d1/d2");

    FitDiagnostics dg;
    if (j.contains("diagnostics") && j["diagnostics"].is_object()) {
      const json& g = j["diagnostics"];
      dg.iterations = g.value("iterations", 0);
      dg.objective = g.value("objective", 0.0);
      dg.restarts = g.value("restarts", 0);
      dg.singular_blocks = g.value("singular_blocks", 0);
      dg.boundary_projections = g.value("boundary_projections", 0);
      dg.frechet_warning = g.value("frechet_warning", false);
    }
    StoredModel out{FittedModel{kind, rank, CoefficientTensor(std::move(t), 1e-9), std::move(factors), std::move(ref_in),
                                std::move(ref_out), dg},
                    standardization_of(j.value("standardize_in", json()), "standardize_in"),
                    standardization_of(j.value("standardize_out", json()), "standardize_out")};
    if (out.standardize_in && out.standardize_in->shift.size() != d1) bad_model("standardize_in has the wrong length");
    if (out.standardize_out && out.standardize_out->shift.size() != d2) bad_model("standardize_out has the wrong length");
    return out;
  } catch (const json::exception& e) {
    bad_model(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    bad_model(e.what());
  }
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  c.d = 2;
  c.n = 200;
  c.N = 500;
  c.runs = 100;
  if (name == "fig2-desk") return c;
  if (name == "fig3-desk") {
    c.d = 6;
    c.model_kind = ModelKind::LowRank;
    c.rank = 2;
    c.runs = 50;
    return c;
  }
  if (name == "fig4-desk") {
    c.t_dof = 5.0;
    c.runs = 50;
    return c;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "' (known: fig2-desk, fig3-desk, fig4-desk)");
}

ScenarioConfig scenario_from_json(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, source + ":" + std::to_string(line_of_offset(text, e.byte)) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Parse, source + ":1: config must be a JSON object");

  auto where = [&](const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return source + ":" + std::to_string(pos == std::string_view::npos ? 1 : line_of_offset(text, pos));
  };
  auto fail = [&](const std::string& key, const std::string& what) -> void {
    throw Error(ErrorCode::Parse, where(key) + ": field '" + key + "': " + what);
  };
  auto integer = [&](const json& v, const std::string& key) -> long long {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  };
  auto real = [&](const json& v, const std::string& key) -> double {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  };

  ScenarioConfig cfg;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) fail("preset", "expected a string");
    try {
      cfg = preset(j["preset"].get<std::string>());
    } catch (const Error& e) {
      fail("preset", e.what());
    }
  }
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") continue;
    if (key == "schema_version") {
      if (integer(v, key) != kSchemaVersion) fail(key, "unsupported version " + v.dump());
    } else if (key == "d") {
      cfg.d = static_cast<int>(integer(v, key));
    } else if (key == "n") {
      cfg.n = static_cast<int>(integer(v, key));
    } else if (key == "N") {
      cfg.N = static_cast<int>(integer(v, key));
    } else if (key == "model_kind") {
      if (!v.is_string()) fail(key, "expected \"basic\" or \"lowrank\"");
      try {
        cfg.model_kind = parse_model_kind(v.get<std::string>());
      } catch (const Error& e) {
        fail(key, e.what());
      }
    } else if (key == "rank") {
      cfg.rank = static_cast<int>(integer(v, key));
    } else if (key == "runs") {
      cfg.runs = static_cast<int>(integer(v, key));
    } else if (key == "new_predictors") {
      cfg.new_predictors = static_cast<int>(integer(v, key));
    } else if (key == "t_dof") {
      if (v.is_null()) cfg.t_dof.reset();
      else cfg.t_dof = real(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "low_rank") {
      if (!v.is_object()) fail(key, "expected an object");
      for (const auto& [k2, v2] : v.items()) {
        if (k2 == "restarts") cfg.low_rank.restarts = static_cast<int>(integer(v2, k2));
        else if (k2 == "max_iters") cfg.low_rank.max_iters = static_cast<int>(integer(v2, k2));
        else if (k2 == "tol") cfg.low_rank.tol = real(v2, k2);
        else fail(k2, "unknown field in low_rank");
      }
    } else {
      fail(key, "unknown field");
    }
  }
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidArgument, source + ": " + e.what());
  }
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["d"] = cfg.d;
  j["n"] = cfg.n;
  j["N"] = cfg.N;
  j["model_kind"] = std::string(to_string(cfg.model_kind));
  j["rank"] = cfg.rank;
  j["runs"] = cfg.runs;
  j["new_predictors"] = cfg.new_predictors;
  j["t_dof"] = cfg.t_dof ? json(*cfg.t_dof) : json(nullptr);
  j["seed"] = cfg.seed;
  j["low_rank"] = {{"restarts", cfg.low_rank.restarts}, {"max_iters", cfg.low_rank.max_iters}, {"tol", cfg.low_rank.tol}};
  return j.dump(2) + "\n";
}

std::string run_records_csv(std::span<const RunRecord> records) {
  std::ostringstream out;
  out << "run,awd_proposed,awd_alternative,proj_proposed,proj_alternative\n";
  for (const auto& r : records) {
    out << r.run << ',' << format_real(r.awd_proposed) << ',' << format_real(r.awd_alternative) << ','
        << r.projection_count_proposed << ',' << r.projection_count_alternative << '\n';
  }
  return out.str();
}

std::string summary_json(const ScenarioConfig& cfg, const ScenarioSummary& s) {
  auto five = [](const FiveNumberSummary& f) {
    return json{{"min", rounded(f.min)},       {"q25", rounded(f.q25)}, {"median", rounded(f.median)},
                {"q75", rounded(f.q75)},       {"max", rounded(f.max)}};
  };
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = json::parse(scenario_to_json(cfg));
  j["runs"] = s.runs;
  j["quantiles"] = "linear interpolation between order statistics, h = (n - 1) p";
  j["proposed"] = five(s.proposed);
  j["alternative"] = five(s.alternative);
  j["projections"] = {{"proposed_total", s.projections_proposed},
                      {"alternative_total", s.projections_alternative},
                      {"proposed_runs", s.runs_with_projection_proposed},
                      {"alternative_runs", s.runs_with_projection_alternative}};
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string manifest_json(const Manifest& m) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
  json j{{"schema_version", kSchemaVersion}, {"command", m.command},         {"config_hash", std::string("fnv1a64:") + hash},
         {"seed", m.seed},                   {"version", std::string(kVersion)}, {"started_at", m.started_at},
         {"finished_at", m.finished_at}};
  return j.dump(2) + "\n";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gwr
