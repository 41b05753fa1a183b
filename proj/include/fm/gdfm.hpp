#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fm/panel.hpp"
#include "fm/static_fm.hpp"

namespace fm {

// Dynamic PCA decomposition: rank-q spectral projectors inverted into
// two-sided filters of length 2M+1.  The filtered common component exists
// only on the interior time range [t_begin, t_begin + valid_length); the
// decomposition reports that range instead of padding.
struct DynamicDecomposition {
  int q = 0;
  int M = 0;
  int t_begin = 0;                         // first valid time index (0-based)
  Eigen::MatrixXd common;                  // n x (T - 2M)
  Eigen::MatrixXd idio;                    // n x (T - 2M)
  std::vector<Eigen::MatrixXd> filters;    // 2M+1 matrices, index k + M

  int valid_length() const { return static_cast<int>(common.cols()); }
  const Eigen::MatrixXd& filter(int k) const { return filters.at(k + M); }
};

DynamicDecomposition gdfm_decompose(const Panel& p, int q, int M);

// Hallin-Liska style selection of the number of dynamic shocks from
// permutation-averaged integrated spectral eigenvalues over nested
// sub-panels.
TunedSelection select_q_hl(const Panel& p, const std::vector<Permutation>& perms,
                           int q_max, const Eigen::VectorXd& c_grid,
                           const std::vector<int>& m_grid, int M);

TunedSelection select_q_hl(const Panel& p, int q_max, int M, std::uint64_t seed,
                           int n_permutations = 20);

// CSV rows: i, j, k, coefficient (1-based series indices, k in -M..M).
void write_filters_csv(const DynamicDecomposition& d,
                       const std::filesystem::path& path);

}  // namespace fm
