#include "cig/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cig::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text, std::size_t line) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw Error(ErrorCode::Parse,
                "line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  return in;
}

template <typename Scalar>
Scalar parse_entry(const Json& v);

template <>
double parse_entry<double>(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw Error(ErrorCode::Parse, "matrix entries must be numbers or strings");
  const auto s = v.get<std::string>();
  if (s.find('/') != std::string::npos) return Rational::parse(s).to_double();
  return parse_double(s, 0);
}

template <>
Rational parse_entry<Rational>(const Json& v) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (!v.is_string())
    throw Error(ErrorCode::Parse, "exact matrix entries must be strings such as \"1/3\"");
  return Rational::parse(v.get<std::string>());
}

template <typename Scalar>
AStochasticMatrix<Scalar> stochastic_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("entries") || !j.contains("blocks"))
    throw Error(ErrorCode::Parse, "expected {\"entries\": ..., \"blocks\": ...}");
  const Json& rows = j.at("entries");
  if (!rows.is_array() || rows.empty() || !rows.front().is_array())
    throw Error(ErrorCode::Parse, "entries must be a non-empty array of rows");
  const Index m = static_cast<Index>(rows.size());
  const Index n = static_cast<Index>(rows.front().size());
  MatrixX<Scalar> entries(m, n);
  for (Index i = 0; i < m; ++i) {
    const Json& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw Error(ErrorCode::Parse, "ragged entries", i);
    for (Index c = 0; c < n; ++c) entries(i, c) = parse_entry<Scalar>(row.at(static_cast<std::size_t>(c)));
  }
  std::vector<std::vector<Index>> blocks;
  for (const Json& b : j.at("blocks")) {
    std::vector<Index> block;
    for (const Json& e : b) block.push_back(e.get<Index>() - 1);
    blocks.push_back(std::move(block));
  }
  return AStochasticMatrix<Scalar>::make(std::move(entries), Partition::make(std::move(blocks), n));
}

template <typename Scalar>
MarkovMorphism<Scalar> morphism_from(const Json& j) {
  if (!j.is_object() || !j.contains("R") || !j.contains("Q") || !j.at("Q").is_array())
    throw Error(ErrorCode::Parse, "expected {\"R\": ..., \"Q\": [...]}");
  std::vector<AStochasticMatrix<Scalar>> Q;
  for (const Json& q : j.at("Q")) Q.push_back(stochastic_from_json<Scalar>(q));
  return MarkovMorphism<Scalar>::make(stochastic_from_json<Scalar>(j.at("R")), std::move(Q));
}

std::string entry_text(double v) { return format_double(v); }
std::string entry_text(const Rational& v) { return v.str(); }

template <typename Scalar>
Json stochastic_to_json(const AStochasticMatrix<Scalar>& a) {
  Json entries = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(entry_text(a(i, c)));
    entries.push_back(std::move(row));
  }
  Json blocks = Json::array();
  for (const auto& block : a.partition().blocks()) {
    Json b = Json::array();
    for (Index e : block) b.push_back(e + 1);
    blocks.push_back(std::move(b));
  }
  return {{"entries", std::move(entries)}, {"blocks", std::move(blocks)}};
}

template <typename Scalar>
Json morphism_json(const MarkovMorphism<Scalar>& f) {
  Json Q = Json::array();
  for (const auto& q : f.Qs()) Q.push_back(stochastic_to_json(q));
  return {{"R", stochastic_to_json(f.R())}, {"Q", std::move(Q)}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    std::vector<double> row;
    for (auto cell : split(text, ',')) row.push_back(parse_double(cell, lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::BadShape, "ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::BadShape, "empty matrix");
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

Matrix read_matrix_csv_file(const std::string& path) {
  auto in = open(path);
  return read_matrix_csv(in);
}

Vector read_vector_csv_file(const std::string& path) {
  const Matrix m = read_matrix_csv_file(path);
  if (m.rows() == 1) return m.row(0).transpose();
  if (m.cols() == 1) return m.col(0);
  throw Error(ErrorCode::BadShape, "expected a single row or column in '" + path + "'");
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<Observation> read_observations_csv(std::istream& in) {
  std::vector<Observation> obs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto cells = split(text, ',');
    if (cells.size() != 2)
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected x_index,y_index");
    Index idx[2];
    for (int c = 0; c < 2; ++c) {
      const auto cell = trim(cells[static_cast<std::size_t>(c)]);
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), idx[c]);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
        throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": bad index");
    }
    obs.push_back({idx[0] - 1, idx[1] - 1});
  }
  return obs;
}

Dataset read_dataset_csv_file(const std::string& path, Index k, Index m) {
  auto in = open(path);
  return Dataset::make(read_observations_csv(in), k, m);
}

FeatureSet features_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("values") || !j.at("values").is_array())
    throw Error(ErrorCode::Parse, "expected {\"F\": n, \"values\": [[[...]]]}");
  std::vector<Matrix> values;
  for (const Json& f : j.at("values")) {
    if (!f.is_array() || f.empty() || !f.front().is_array())
      throw Error(ErrorCode::Parse, "each feature must be a k x m array");
    Matrix v(static_cast<Index>(f.size()), static_cast<Index>(f.front().size()));
    for (Index x = 0; x < v.rows(); ++x) {
      const Json& row = f.at(static_cast<std::size_t>(x));
      if (static_cast<Index>(row.size()) != v.cols()) throw Error(ErrorCode::BadShape, "ragged feature row", x);
      for (Index y = 0; y < v.cols(); ++y) v(x, y) = row.at(static_cast<std::size_t>(y)).get<double>();
    }
    values.push_back(std::move(v));
  }
  if (j.contains("F") && j.at("F").get<std::size_t>() != values.size())
    throw Error(ErrorCode::BadShape, "F does not match the number of feature arrays");
  return FeatureSet::make(std::move(values));
}

Json features_to_json(const FeatureSet& features) {
  Json values = Json::array();
  for (const Matrix& v : features.values()) {
    Json f = Json::array();
    for (Index x = 0; x < v.rows(); ++x) {
      Json row = Json::array();
      for (Index y = 0; y < v.cols(); ++y) row.push_back(v(x, y));
      f.push_back(std::move(row));
    }
    values.push_back(std::move(f));
  }
  return {{"F", features.count()}, {"values", std::move(values)}};
}

MarkovMorphism<double> morphism_from_json(const Json& j) { return morphism_from<double>(j); }
MarkovMorphism<Rational> exact_morphism_from_json(const Json& j) { return morphism_from<Rational>(j); }
Json morphism_to_json(const MarkovMorphism<double>& f) { return morphism_json(f); }
Json morphism_to_json(const MarkovMorphism<Rational>& f) { return morphism_json(f); }

Json read_json_file(const std::string& path) {
  auto in = open(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, "'" + path + "': " + e.what());
  }
}

}  // namespace cig::io
