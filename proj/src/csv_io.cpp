#include "dsdr/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "dsdr/error.hpp"

namespace dsdr {

namespace {

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, const std::string& where) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorKind::InvalidArgument,
                where + ": cannot parse '" + std::string(field) + "' as a number");
  }
  if (!std::isfinite(value)) throw Error(ErrorKind::NonFinite, where + ": non-finite value");
  return value;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace

Dataset read_dataset(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, path + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);
  if (header.size() < 2 || trim(header[0]) != "y") {
    throw Error(ErrorKind::InvalidArgument, path + ": header must be y,x1,...,xp");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (trim(header[j]) != "x" + std::to_string(j)) {
      throw Error(ErrorKind::InvalidArgument, path + ": header must be y,x1,...,xp");
    }
  }
  const std::size_t p = header.size() - 1;

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != p + 1) {
      throw Error(ErrorKind::InvalidArgument, where + ": expected " + std::to_string(p + 1) + " fields");
    }
    for (auto f : fields) values.push_back(parse_number(f, where));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::EmptyData, path + ": no observations");

  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  data.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    data.y(static_cast<Eigen::Index>(i)) = values[i * (p + 1)];
    for (std::size_t j = 0; j < p; ++j) {
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (p + 1) + j + 1];
    }
  }
  return data;
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  out << "y";
  for (Eigen::Index j = 0; j < data.p(); ++j) out << ",x" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << fmt(data.y(i), 17);
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ',' << fmt(data.x(i, j), 17);
    out << '\n';
  }
  finish(out, path);
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j), 17);
    out << '\n';
  }
  finish(out, path);
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (auto f : split(line)) row.push_back(parse_number(f, path + ":" + std::to_string(lineno)));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::InvalidArgument, path + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyData, path + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_vector(const std::string& path, const Vector& v) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << fmt(v(i), 17) << '\n';
  finish(out, path);
}

std::string format_report(const std::vector<ReportRow>& rows, bool include_timing) {
  bool dcor = false;
  for (const auto& r : rows) dcor = dcor || r.mean_dcor.has_value();

  std::ostringstream out;
  out << "model,engine,variant,n,p,k,B,replicates,mean_distance,sd_distance,mean_runtime_s";
  if (dcor) out << ",mean_dcor";
  out << '\n';
  for (const auto& r : rows) {
    const ExperimentConfig& c = r.config;
    const bool distributed = c.fit.engine != Engine::Full;
    out << to_string(c.model.model_id) << ',' << to_string(c.fit.engine) << ','
        << to_string(c.fit.variant) << ',' << c.model.n << ',' << c.model.p << ','
        << (distributed ? c.fit.k : 1) << ','
        << (c.fit.engine == Engine::Refined ? std::to_string(c.fit.B) : "NA") << ','
        << c.replicates << ',' << fmt(r.mean_distance, 10) << ',' << fmt(r.sd_distance, 10) << ','
        << (include_timing ? fmt(r.mean_runtime_seconds, 6) : "NA");
    if (dcor) out << ',' << (r.mean_dcor ? fmt(*r.mean_dcor, 10) : "NA");
    out << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace dsdr
