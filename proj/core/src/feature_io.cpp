#include "isocl/feature_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace isocl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, std::size_t line, std::size_t column) {
  double v = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "column " + std::to_string(column + 1) + ": cannot parse '" +
                               std::string(cell) + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw ParseError(line, "column " + std::to_string(column + 1) + ": non-finite value");
  }
  return v;
}

}  // namespace

FeatureMatrix read_feature_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "label") {
    throw ParseError(1, "header must be 'label,f0,f1,...'");
  }
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] != "f" + std::to_string(c - 1)) {
      throw ParseError(1, "expected column name 'f" + std::to_string(c - 1) + "', found '" +
                              std::string(header[c]) + "'");
    }
  }
  const std::size_t dim = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t labeled_rows = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != dim + 1) {
      throw ParseError(line_no, "row has " + std::to_string(cells.size()) + " fields, expected " +
                                    std::to_string(dim + 1));
    }
    if (cells[0].empty()) {
      labels.push_back(-1);
    } else {
      int y = 0;
      const auto* end = cells[0].data() + cells[0].size();
      auto [ptr, ec] = std::from_chars(cells[0].data(), end, y);
      if (ec != std::errc() || ptr != end || y < 0) {
        throw ParseError(line_no, "label '" + std::string(cells[0]) + "' is not a non-negative integer");
      }
      labels.push_back(y);
      ++labeled_rows;
    }
    for (std::size_t c = 1; c <= dim; ++c) values.push_back(parse_double(cells[c], line_no, c));
    ++rows;
  }
  if (labeled_rows != 0 && labeled_rows != rows) {
    throw ParseError(line_no, "either every row or no row must carry a label");
  }

  Matrix data(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = values[r * dim + c];
    }
  }
  if (labeled_rows == 0) return FeatureMatrix(std::move(data));
  return FeatureMatrix(std::move(data), std::move(labels));
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open feature file '" + path.string() + "'");
  return read_feature_csv(in);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& x) {
  out << "label";
  for (Eigen::Index i = 0; i < x.dimension(); ++i) out << ",f" << i;
  out << '\n';
  for (Eigen::Index j = 0; j < x.samples(); ++j) {
    if (x.has_labels()) out << (*x.labels())[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < x.dimension(); ++i) out << ',' << format_double(x.data()(i, j));
    out << '\n';
  }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& x) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write feature file '" + path.string() + "'");
  write_feature_csv(out, x);
}

}  // namespace isocl
