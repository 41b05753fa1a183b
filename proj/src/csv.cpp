#include "fm/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fm::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path.string());
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    t.rows.push_back(split_line(line));
  }
  return t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& row_ids,
                  const std::vector<std::string>& col_ids,
                  const std::string& corner) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path.string());
  out << corner;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    out << ',' << (j < static_cast<Eigen::Index>(col_ids.size()) ? col_ids[j]
                                                                 : "c" + std::to_string(j + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << (i < static_cast<Eigen::Index>(row_ids.size()) ? row_ids[i]
                                                          : "r" + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

double parse_double(const std::string& cell, const std::string& context) {
  if (cell.empty()) throw std::runtime_error("missing value in " + context);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("non-numeric cell '" + cell + "' in " + context);
  }
  if (pos != cell.size())
    throw std::runtime_error("non-numeric cell '" + cell + "' in " + context);
  return v;
}

}  // namespace fm::csv
