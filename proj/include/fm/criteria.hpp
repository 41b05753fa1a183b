#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace fm {

// Penalized criterion surface over sub-panel sizes m and penalty multipliers
// c.  For normalized eigenvalues lambda~ (scaled so they average one within
// each sub-panel) the criterion is
//   IC^(m)(k; c) = 1 - (1/m) sum_{j<=k} lambda~_j^(m) + k c p(m),
// equivalently the variance share left by the top k eigenvalues plus the
// penalty.  q_check(m, c) minimizes over k in {0,...,k_max}, ties to the
// smallest k.
struct ICSurface {
  std::vector<int> m_grid;
  Eigen::VectorXd c_grid;
  std::vector<Eigen::MatrixXd> values;  // per m: (k_max+1) x |c|
  Eigen::MatrixXi selected;             // |m| x |c|
  Eigen::VectorXd stability;            // per c: stdev of selected over m
  double c_star = 0.0;
  int chosen = -1;
  bool degraded = false;  // no zero-stability interval beyond the first
};

// avg_eigs: k_max x |m|, permutation-averaged top eigenvalues per sub-panel
// size (static: covariance eigenvalues; dynamic: integrated spectral
// eigenvalues).  avg_level: per m, the (1/m)-scaled trace on the same scale.
// The tuned constant c* is the midpoint of the second maximal zero-stability
// interval of c (the first, at small c, is the under-penalized zone); among
// equal-length candidates the one with smaller c wins.  The chosen count is
// the selection at the largest m under c*.
ICSurface tune_penalized_count(const Eigen::MatrixXd& avg_eigs,
                               const Eigen::VectorXd& avg_level,
                               const std::vector<int>& m_grid,
                               const Eigen::VectorXd& c_grid, int k_max,
                               const std::function<double(int)>& penalty);

Eigen::VectorXd default_c_grid();          // 101 points on [0.01, 3]
std::vector<int> default_m_grid(int n);    // 10 equally spaced sizes, n/2..n

double static_penalty(int m, int T);
double dynamic_penalty(int m, int T, int M);

void write_ic_surface_csv(const ICSurface& s, const std::string& path);

}  // namespace fm
