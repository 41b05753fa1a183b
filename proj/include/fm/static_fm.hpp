#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fm/criteria.hpp"
#include "fm/panel.hpp"

namespace fm {

// Covariance-PCA factor decomposition.  The common component is the rank-r
// principal projection of the demeaned panel; idio is defined by subtraction
// from the raw panel, so common + idio reproduces the input exactly.
struct StaticDecomposition {
  int r = 0;
  Eigen::MatrixXd factors;   // r x T, sample covariance = identity
  Eigen::MatrixXd loadings;  // n x r
  Eigen::MatrixXd common;    // n x T
  Eigen::MatrixXd idio;      // n x T
};

StaticDecomposition static_decompose(const Panel& p, int r);

// argmax_{1<=j<=r_max} lambda_j / lambda_{j+1}; ties to the smallest j.
int select_r_ratio(const Eigen::VectorXd& eigenvalues, int r_max);

// Bai-Ng style information criterion over k in {0,...,r_max}:
//   IC(k) = log V(k) + k ((n+T)/(nT)) log(min(n,T)),
//   V(k) = (1/(nT)) sum_{j>k} lambda_j.
int select_r_ic(const Panel& p, int r_max);

struct TunedSelection {
  int count = -1;
  ICSurface surface;
};

// Tuned criterion on permutation-averaged covariance eigenvalues over nested
// sub-panels, penalty ((m+T)/(mT)) log(min(m,T)).
TunedSelection select_r_tuned(const Panel& p, const std::vector<Permutation>& perms,
                              int r_max, const Eigen::VectorXd& c_grid,
                              const std::vector<int>& m_grid);

// Default path: R content-keyed permutations (invariant under input row
// relabeling), default c and m grids.
TunedSelection select_r_tuned(const Panel& p, int r_max, std::uint64_t seed,
                              int n_permutations = 20);

}  // namespace fm
