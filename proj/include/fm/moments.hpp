#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "fm/panel.hpp"

namespace fm {

// Lagged autocovariances Gamma_k, k = 0..K, divisor T (biased), computed on
// the demeaned panel.  The divisor-T convention keeps the Bartlett lag-window
// spectral estimate positive semidefinite.
struct CovarianceSet {
  std::vector<Eigen::MatrixXd> gammas;
  int n = 0;
  int T = 0;
  int K = 0;

  const Eigen::MatrixXd& gamma(int k) const { return gammas.at(k); }
};

CovarianceSet autocovariances(const Panel& p, int K);

// Symmetric eigendecomposition, eigenvalues descending, eigenvectors
// orthonormal with each column's largest-magnitude entry positive.
struct SymEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymEigen eigen_sym(const Eigen::MatrixXd& G);

// Top-j eigenvalues over nested leading sub-panels, averaged across
// permutations.  values(j, g) is the (j+1)-th eigenvalue at size sizes[g];
// entries with j >= m are zero.
struct EigenTrajectory {
  std::vector<int> sizes;
  Eigen::MatrixXd values;                        // j_max x sizes.size()
  double normalization = 1.0;                    // divisor already applied
  int n_permutations = 1;
  std::vector<Eigen::MatrixXd> per_permutation;  // kept on request
};

struct TrajectoryOptions {
  bool normalize = false;             // divide by the full-panel top eigenvalue
  bool keep_permutation_values = false;
  bool use_reference_kernel = false;  // serial from-scratch implementation
};

// Every integer 1..n for n <= 512, otherwise 64 log-spaced sizes.
std::vector<int> default_size_grid(int n);

EigenTrajectory eigenvalue_trajectory(const Panel& p,
                                      const std::vector<Permutation>& perms,
                                      int j_max, const std::vector<int>& grid,
                                      const TrajectoryOptions& opts = {});

// Population mode: sweep leading blocks of a given covariance matrix.
EigenTrajectory eigenvalue_trajectory_from_cov(const Eigen::MatrixXd& gamma0,
                                               const std::vector<Permutation>& perms,
                                               int j_max, const std::vector<int>& grid,
                                               const TrajectoryOptions& opts = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// OLS of the averaged trajectory value for eigenvalue index j (0-based) on m,
// restricted to grid sizes m >= max(j+1, 10).
LinearFit linear_growth_fit(const EigenTrajectory& traj, int j);

// Long format: permutation_id|"avg", j (1-based), m, value.
void write_trajectory_csv(const EigenTrajectory& traj,
                          const std::filesystem::path& path);

}  // namespace fm
