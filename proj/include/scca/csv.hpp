#pragma once

// CSV serialization. Matrix files carry no header and print every entry with
// 17 significant digits so a write/read round trip is exact. Table files
// (risk tables, reports) carry a header row and RFC 4180 quoting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scca/errors.hpp"
#include "scca/matrix.hpp"

namespace scca {

// Shortest exact decimal form would also round-trip, but a fixed %.17g keeps
// the byte layout identical across compilers.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_matrix_csv(const std::filesystem::path& path,
                             const Matrix& m) {
  std::ofstream out(path);
  if (!out)
    throw ArgumentError("write_matrix_csv: cannot open " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw ArgumentError("write_matrix_csv: write failed for " +
                                path.string());
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ArgumentError("read_matrix_csv: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (pos != cell.size())
          throw ArgumentError("trailing characters");
      } catch (const std::exception&) {
        throw ArgumentError("read_matrix_csv: bad numeric cell '" + cell +
                            "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ArgumentError("read_matrix_csv: ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw ArgumentError("read_matrix_csv: no data in " + path.string());
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

}  // namespace scca
