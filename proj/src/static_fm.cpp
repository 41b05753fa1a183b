#include "fm/static_fm.hpp"

#include <cmath>
#include <stdexcept>

#include "fm/kernels.hpp"
#include "fm/moments.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

StaticDecomposition static_decompose(const Panel& p, int r) {
  require(r >= 1 && r <= std::min(p.n(), p.T() - 1),
          "static_decompose: need 1 <= r <= min(n, T-1)");
  const Eigen::MatrixXd gamma0 = autocovariances(p, 0).gamma(0);
  const SymEigen eig = eigen_sym(gamma0);
  require(eig.values(r - 1) > 1e-12 * eig.values(0),
          "static_decompose: r exceeds the rank of the covariance");

  Eigen::MatrixXd x = p.data;
  for (int i = 0; i < p.n(); ++i) x.row(i).array() -= p.data.row(i).mean();

  const Eigen::MatrixXd Vr = eig.vectors.leftCols(r);
  const Eigen::VectorXd lr = eig.values.head(r);

  StaticDecomposition d;
  d.r = r;
  d.factors = lr.cwiseSqrt().cwiseInverse().asDiagonal() * (Vr.transpose() * x);
  d.loadings = Vr * lr.cwiseSqrt().asDiagonal();
  d.common = Vr * (Vr.transpose() * x);
  d.idio = p.data - d.common;
  return d;
}

int select_r_ratio(const Eigen::VectorXd& eigenvalues, int r_max) {
  const int n = static_cast<int>(eigenvalues.size());
  require(r_max >= 1 && r_max <= n - 1, "select_r_ratio: need 1 <= r_max <= n-1");
  int best = 1;
  double best_ratio = -1.0;
  for (int j = 1; j <= r_max; ++j) {
    const double denom = eigenvalues(j);
    const double ratio = denom > 0.0 ? eigenvalues(j - 1) / denom
                                     : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

int select_r_ic(const Panel& p, int r_max) {
  require(r_max >= 1 && r_max <= std::min(p.n(), p.T()) / 2,
          "select_r_ic: need 1 <= r_max <= min(n,T)/2");
  const Eigen::MatrixXd gamma0 = autocovariances(p, 0).gamma(0);
  const SymEigen eig = eigen_sym(gamma0);
  const double nT = static_cast<double>(p.n()) * p.T();
  const double penalty =
      (p.n() + p.T()) / nT * std::log(static_cast<double>(std::min(p.n(), p.T())));
  double tail = eig.values.sum();
  int best_k = 0;
  double best = std::log(tail / nT);
  for (int k = 1; k <= r_max; ++k) {
    tail -= eig.values(k - 1);
    if (tail <= 0.0) break;
    const double ic = std::log(tail / nT) + k * penalty;
    if (ic < best) {
      best = ic;
      best_k = k;
    }
  }
  return best_k;
}

TunedSelection select_r_tuned(const Panel& p, const std::vector<Permutation>& perms,
                              int r_max, const Eigen::VectorXd& c_grid,
                              const std::vector<int>& m_grid) {
  const Eigen::MatrixXd gamma0 = autocovariances(p, 0).gamma(0);
  SweepResult sweep = static_eigen_sweep(gamma0, perms, m_grid, r_max);
  const Eigen::MatrixXd avg = average_sweep(sweep.values);
  const Eigen::VectorXd traces = average_traces(sweep.traces);
  Eigen::VectorXd level(m_grid.size());
  for (std::size_t g = 0; g < m_grid.size(); ++g)
    level(static_cast<Eigen::Index>(g)) =
        traces(static_cast<Eigen::Index>(g)) / m_grid[g];
  const int T = p.T();
  TunedSelection sel;
  sel.surface = tune_penalized_count(avg, level, m_grid, c_grid, r_max,
                                     [T](int m) { return static_penalty(m, T); });
  sel.count = sel.surface.chosen;
  return sel;
}

TunedSelection select_r_tuned(const Panel& p, int r_max, std::uint64_t seed,
                              int n_permutations) {
  return select_r_tuned(p, content_keyed_permutations(p, n_permutations, seed),
                        r_max, default_c_grid(), default_m_grid(p.n()));
}

}  // namespace fm
