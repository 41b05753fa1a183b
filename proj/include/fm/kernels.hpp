#pragma once

// Data-parallel sweep kernels behind the trajectory and selection machinery.
// Tasks are (permutation, sub-panel size) pairs; each task writes only its
// own output slot, so results do not depend on the schedule or thread count.
// The fm::ref variants are plain serial implementations that recompute every
// sub-panel moment directly from the panel data; they are the correctness
// reference for the optimized block-extraction path and the baseline for the
// benchmark tool.

#include <Eigen/Dense>
#include <vector>

#include "fm/panel.hpp"

namespace fm {

struct SweepResult {
  // values[p] is j_max x grid.size(): top eigenvalues (descending) of the
  // leading-m sub-panel under permutation p; dynamic sweeps store integrated
  // spectral eigenvalues (Riemann weight 2 pi / (2M+1)).
  std::vector<Eigen::MatrixXd> values;
  // traces[p][g]: trace of the sub-panel lag-zero covariance (static) or the
  // integrated spectral trace (dynamic, equals 2 pi x lag-zero trace).
  std::vector<Eigen::VectorXd> traces;
};

SweepResult static_eigen_sweep(const Eigen::MatrixXd& gamma0,
                               const std::vector<Permutation>& perms,
                               const std::vector<int>& grid, int j_max);

// gammas holds lags 0..M of the full panel; Bartlett weights are applied
// inside.  Eigenvalues at frequency -theta mirror +theta, so only half the
// grid is solved.
SweepResult dynamic_eigen_sweep(const std::vector<Eigen::MatrixXd>& gammas,
                                int M, const std::vector<Permutation>& perms,
                                const std::vector<int>& grid, int j_max);

// Fixed-order mean across permutations.
Eigen::MatrixXd average_sweep(const std::vector<Eigen::MatrixXd>& per_perm);
Eigen::VectorXd average_traces(const std::vector<Eigen::VectorXd>& per_perm);

namespace ref {

SweepResult static_eigen_sweep(const Panel& p, const std::vector<Permutation>& perms,
                               const std::vector<int>& grid, int j_max);

SweepResult dynamic_eigen_sweep(const Panel& p, int M,
                                const std::vector<Permutation>& perms,
                                const std::vector<int>& grid, int j_max);

}  // namespace ref

}  // namespace fm
