#pragma once

// Shared helpers and independent oracles for the test suites.  Oracles here
// must stay independent of the library code paths they check.

#include <unistd.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testsup {

// Writes content to a fresh temporary file and removes it on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& content, const std::string& tag = "fmtk") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
             ".csv");
    std::ofstream out(path_);
    out << content;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "fmtk") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_dir_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Oracle: eigenvalues of b b' + sigma2 I are (b'b + sigma2, sigma2, ..., sigma2).
inline double rank_one_top_eigenvalue(const Eigen::VectorXd& b, double sigma2 = 1.0) {
  return b.squaredNorm() + sigma2;
}

// Oracle: population spectrum of a scalar AR(1) with unit innovations under
// the no-1/(2 pi) convention.
inline double ar1_spectrum(double phi, double theta) {
  return 1.0 / (1.0 - 2.0 * phi * std::cos(theta) + phi * phi);
}

// Brute-force covariance with divisor T on demeaned rows (reference path,
// no library calls).
inline Eigen::MatrixXd naive_cov(const Eigen::MatrixXd& x_in) {
  Eigen::MatrixXd x = x_in;
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i).array() -= x_in.row(i).mean();
  return x * x.transpose() / static_cast<double>(x.cols());
}

inline Eigen::MatrixXd random_gaussian(int rows, int cols, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(eng);
  return m;
}

}  // namespace testsup
