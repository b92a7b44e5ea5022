#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "mka/matrix.hpp"

namespace mka::io {

/// Shortest decimal that parses back to the same binary64 value.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  if (begin == end) return false;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct NumericCsv {
  std::vector<std::vector<double>> rows;
  bool had_header = false;
};

/// Reads a comma-separated numeric file. With allow_header set, a first line
/// containing any non-numeric cell is treated as a header and skipped; any
/// later non-numeric cell is an error naming the (1-based) row and column.
inline NumericCsv read_numeric_csv(const std::string& path, bool allow_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  NumericCsv out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], row[c])) {
        numeric = false;
        bad_col = c;
        break;
      }
    }
    if (!numeric) {
      if (allow_header && out.rows.empty() && !out.had_header) {
        out.had_header = true;
        continue;
      }
      throw std::runtime_error(path + ": non-numeric cell at row " + std::to_string(lineno) +
                               ", column " + std::to_string(bad_col + 1));
    }
    if (!out.rows.empty() && row.size() != out.rows.front().size())
      throw std::runtime_error(path + ": row " + std::to_string(lineno) +
                               " has a different column count");
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Matrix CSV: plain numeric rows, no header, row-major.
inline Matrix read_matrix_csv(const std::string& path) {
  const NumericCsv csv = read_numeric_csv(path, false);
  if (csv.rows.empty()) throw std::runtime_error(path + ": empty matrix file");
  Matrix m(csv.rows.size(), csv.rows.front().size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    for (std::size_t j = 0; j < csv.rows[i].size(); ++j) m(i, j) = csv.rows[i][j];
  return m;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace mka::io
