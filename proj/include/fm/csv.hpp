#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace fm::csv {

// Raw rectangular CSV: comma separated, '.' decimal point, no quoting.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read(const std::filesystem::path& path);

// 12 significant digits.
std::string format_double(double v);

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& row_ids,
                  const std::vector<std::string>& col_ids,
                  const std::string& corner = "id");

double parse_double(const std::string& cell, const std::string& context);

}  // namespace fm::csv
