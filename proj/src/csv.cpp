#include "gwr/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "gwr/error.hpp"

namespace gwr {

namespace {

constexpr const char* kMeasuresComment = "# gwr measures schema_version=1";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, long line, const std::string& what) {
  throw Error(ErrorCode::Parse, source + ":" + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& s, const std::string& source, long line, const std::string& column) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) parse_fail(source, line, "column " + column + ": not a number '" + s + "'");
  if (!std::isfinite(v)) parse_fail(source, line, "column " + column + ": non-finite value '" + s + "'");
  return v;
}

bool next_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

LongFormatData read_long_format(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  if (!next_line(in, line, line_no)) parse_fail(source, 1, "empty file");
  const auto header = split_fields(line);
  if (header.size() < 3 || header[0] != "unit_id" || header[1] != "role") {
    parse_fail(source, line_no, "header must be unit_id,role,c1,...,cd");
  }
  const std::size_t width = header.size() - 2;
  for (std::size_t j = 0; j < width; ++j) {
    if (header[j + 2] != "c" + std::to_string(j + 1)) {
      parse_fail(source, line_no, "header column " + std::to_string(j + 3) + " must be c" + std::to_string(j + 1));
    }
  }

  std::map<std::string, std::vector<std::vector<double>>> rows[2];
  Eigen::Index arity[2] = {0, 0};
  LongFormatData out;
  std::set<std::string> seen;
  while (next_line(in, line, line_no)) {
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      parse_fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    }
    if (f[0].empty()) parse_fail(source, line_no, "empty unit_id");
    int role = -1;
    if (f[1] == "predictor") role = 0;
    else if (f[1] == "response") role = 1;
    else parse_fail(source, line_no, "role must be predictor or response, found '" + f[1] + "'");

    std::size_t used = width;
    while (used > 0 && f[used + 1].empty()) --used;
    if (used == 0) parse_fail(source, line_no, "no coordinates");
    std::vector<double> values(used);
    for (std::size_t j = 0; j < used; ++j) values[j] = parse_real(f[j + 2], source, line_no, header[j + 2]);
    if (arity[role] == 0) arity[role] = static_cast<Eigen::Index>(used);
    if (arity[role] != static_cast<Eigen::Index>(used)) {
      parse_fail(source, line_no, f[1] + " rows have " + std::to_string(arity[role]) + " coordinates, this row has " +
                                      std::to_string(used));
    }
    if (seen.insert(f[0]).second) out.unit_order.push_back(f[0]);
    rows[role][f[0]].push_back(std::move(values));
  }
  if (out.unit_order.empty()) parse_fail(source, line_no, "no data rows");

  for (int role = 0; role < 2; ++role) {
    auto& target = role == 0 ? out.predictors : out.responses;
    for (auto& [id, block] : rows[role]) {
      Matrix m(static_cast<Eigen::Index>(block.size()), arity[role]);
      for (std::size_t i = 0; i < block.size(); ++i)
        for (Eigen::Index j = 0; j < arity[role]; ++j) m(static_cast<Eigen::Index>(i), j) = block[i][static_cast<std::size_t>(j)];
      target.emplace(id, std::move(m));
    }
  }
  out.predictor_dim = arity[0];
  out.response_dim = arity[1];
  return out;
}

LongFormatData read_long_format_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  return read_long_format(in, path);
}

void write_long_format(std::ostream& out, const LongFormatData& data) {
  const Eigen::Index width = std::max(data.predictor_dim, data.response_dim);
  out << "unit_id,role";
  for (Eigen::Index j = 0; j < width; ++j) out << ",c" << j + 1;
  out << '\n';
  auto emit = [&](const std::string& id, const char* role, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out << id << ',' << role;
      for (Eigen::Index j = 0; j < width; ++j) {
        out << ',';
        if (j < m.cols()) out << format_real(m(i, j));
      }
      out << '\n';
    }
  };
  for (const auto& id : data.unit_order) {
    if (auto it = data.predictors.find(id); it != data.predictors.end()) emit(id, "predictor", it->second);
    if (auto it = data.responses.find(id); it != data.responses.end()) emit(id, "response", it->second);
  }
}

void require_both_roles(const LongFormatData& data, const std::vector<std::string>& units) {
  for (const auto& id : units) {
    if (!data.predictors.count(id)) throw Error(ErrorCode::Parse, "unit '" + id + "' has no predictor rows");
    if (!data.responses.count(id)) throw Error(ErrorCode::Parse, "unit '" + id + "' has no response rows");
  }
}

void write_measures(std::ostream& out, const std::vector<MeasureRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no measures to write");
  const Eigen::Index d = rows.front().measure.dim();
  const bool flags = rows.front().projected.has_value();
  out << kMeasuresComment << '\n' << "unit_id";
  for (Eigen::Index i = 0; i < d; ++i) out << ",m" << i + 1;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out << ",c" << i + 1 << j + 1;
  if (flags) out << ",projected,eta";
  out << '\n';
  for (const auto& r : rows) {
    require_same_dim(r.measure.dim(), d, "measure dimension");
    out << r.unit_id;
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_real(r.measure.mean()(i));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_real(r.measure.cov()(i, j));
    if (flags) out << ',' << (r.projected.value_or(false) ? "true" : "false") << ',' << format_real(r.eta.value_or(1.0));
    out << '\n';
  }
}

std::vector<MeasureRow> read_measures(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  if (!next_line(in, line, line_no)) parse_fail(source, 1, "empty file");
  const auto header = split_fields(line);
  if (header.empty() || header[0] != "unit_id") parse_fail(source, line_no, "header must start with unit_id");
  std::size_t d = 0;
  while (d + 1 < header.size() && header[d + 1] == "m" + std::to_string(d + 1)) ++d;
  if (d == 0) parse_fail(source, line_no, "no mean columns m1..md");
  std::size_t expected = 1 + d + d * d;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t col = 1 + d + i * d + j;
      const std::string name = "c" + std::to_string(i + 1) + std::to_string(j + 1);
      if (col >= header.size() || header[col] != name) parse_fail(source, line_no, "expected covariance column " + name);
    }
  bool flags = false;
  if (header.size() == expected + 2 && header[expected] == "projected" && header[expected + 1] == "eta") {
    flags = true;
    expected += 2;
  }
  if (header.size() != expected) parse_fail(source, line_no, "unexpected columns after covariance block");

  std::vector<MeasureRow> out;
  std::set<std::string> seen;
  while (next_line(in, line, line_no)) {
    const auto f = split_fields(line);
    if (f.size() != expected) parse_fail(source, line_no, "expected " + std::to_string(expected) + " fields");
    if (!seen.insert(f[0]).second) parse_fail(source, line_no, "duplicate unit_id '" + f[0] + "'");
    const auto dd = static_cast<Eigen::Index>(d);
    Vector m(dd);
    Matrix c(dd, dd);
    for (std::size_t i = 0; i < d; ++i) m(static_cast<Eigen::Index>(i)) = parse_real(f[1 + i], source, line_no, header[1 + i]);
    for (std::size_t k = 0; k < d * d; ++k) {
      c(static_cast<Eigen::Index>(k / d), static_cast<Eigen::Index>(k % d)) =
          parse_real(f[1 + d + k], source, line_no, header[1 + d + k]);
    }
    if ((c - c.transpose()).norm() > 1e-8 * (1.0 + c.norm())) {
      parse_fail(source, line_no, "covariance is not symmetric");
    }
    MeasureRow row{f[0], {}, std::nullopt, std::nullopt};
    try {
      row.measure = GaussianMeasure(std::move(m), SymMatrix(c));
    } catch (const Error& e) {
      parse_fail(source, line_no, e.what());
    }
    if (flags) {
      if (f[expected - 2] != "true" && f[expected - 2] != "false") parse_fail(source, line_no, "projected must be true or false");
      row.projected = f[expected - 2] == "true";
      row.eta = parse_real(f[expected - 1], source, line_no, "eta");
    }
    out.push_back(std::move(row));
  }
  if (out.empty()) parse_fail(source, line_no, "no data rows");
  return out;
}

CsvLayout detect_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::string line;
  long line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(ErrorCode::Parse, path + ": empty file");
  const auto header = split_fields(line);
  if (header.size() >= 2 && header[0] == "unit_id" && header[1] == "role") return CsvLayout::Long;
  if (header.size() >= 2 && header[0] == "unit_id" && header[1] == "m1") return CsvLayout::Measures;
  throw Error(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": unrecognized header");
}

std::vector<MeasureRow> read_role_measures(const std::string& path, const std::string& role) {
  if (detect_layout(path) == CsvLayout::Measures) {
    std::ifstream in(path);
    return read_measures(in, path);
  }
  const LongFormatData data = read_long_format_file(path);
  const auto& blocks = role == "predictor" ? data.predictors : data.responses;
  std::vector<MeasureRow> out;
  for (const auto& id : data.unit_order) {
    auto it = blocks.find(id);
    if (it == blocks.end()) continue;
    out.push_back({id, empirical_moments(it->second), std::nullopt, std::nullopt});
  }
  if (out.empty()) throw Error(ErrorCode::Parse, path + ": no " + role + " rows");
  return out;
}

}  // namespace gwr
