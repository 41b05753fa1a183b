#include "fm/kernels.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fm/moments.hpp"
#include "fm/spectra.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_sweep_args(int n, const std::vector<Permutation>& perms,
                      const std::vector<int>& grid, int j_max) {
  require(!perms.empty(), "sweep: permutation list is empty");
  require(!grid.empty(), "sweep: size grid is empty");
  require(j_max >= 1, "sweep: j_max must be >= 1");
  int prev = 0;
  for (int m : grid) {
    require(m > prev, "sweep: grid must be strictly increasing and positive");
    prev = m;
  }
  require(grid.back() <= n, "sweep: grid exceeds panel size");
  for (const auto& p : perms)
    require(p.size() == n, "sweep: permutation length does not match panel");
}

Eigen::VectorXd top_eigenvalues_desc(const Eigen::MatrixXd& sym, int j_max) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const int m = static_cast<int>(sym.rows());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(j_max);
  for (int j = 0; j < std::min(j_max, m); ++j) out(j) = es.eigenvalues()(m - 1 - j);
  return out;
}

Eigen::VectorXd top_eigenvalues_desc(const Eigen::MatrixXcd& herm, int j_max) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  const int m = static_cast<int>(herm.rows());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(j_max);
  for (int j = 0; j < std::min(j_max, m); ++j) out(j) = es.eigenvalues()(m - 1 - j);
  return out;
}

}  // namespace

SweepResult static_eigen_sweep(const Eigen::MatrixXd& gamma0,
                               const std::vector<Permutation>& perms,
                               const std::vector<int>& grid, int j_max) {
  const int n = static_cast<int>(gamma0.rows());
  check_sweep_args(n, perms, grid, j_max);
  const int P = static_cast<int>(perms.size());
  const int G = static_cast<int>(grid.size());

  SweepResult res;
  res.values.assign(P, Eigen::MatrixXd::Zero(j_max, G));
  res.traces.assign(P, Eigen::VectorXd::Zero(G));

  const int tasks = P * G;
#pragma omp parallel for schedule(dynamic)
  for (int task = 0; task < tasks; ++task) {
    const int p = task / G;
    const int g = task % G;
    const int m = grid[g];
    const auto& map = perms[p].map;
    Eigen::MatrixXd block(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) block(a, b) = gamma0(map[a], map[b]);
    res.values[p].col(g) = top_eigenvalues_desc(block, j_max);
    res.traces[p](g) = block.trace();
  }
  return res;
}

SweepResult dynamic_eigen_sweep(const std::vector<Eigen::MatrixXd>& gammas,
                                int M, const std::vector<Permutation>& perms,
                                const std::vector<int>& grid, int j_max) {
  require(static_cast<int>(gammas.size()) >= M + 1,
          "dynamic sweep: need lags 0..M");
  const int n = static_cast<int>(gammas[0].rows());
  check_sweep_args(n, perms, grid, j_max);
  const int P = static_cast<int>(perms.size());
  const int G = static_cast<int>(grid.size());
  const int F = 2 * M + 1;
  const double weight = 2.0 * std::numbers::pi / F;

  // Full-panel spectral matrices on the non-negative half grid; the sub-panel
  // spectrum is the permuted leading block (same Gamma_k inputs).
  std::vector<Eigen::MatrixXcd> sigma(M + 1);
#pragma omp parallel for schedule(static)
  for (int h = 0; h <= M; ++h) {
    const double theta = 2.0 * std::numbers::pi * h / F;
    Eigen::MatrixXcd s = gammas[0].cast<std::complex<double>>();
    for (int k = 1; k <= M; ++k) {
      const double w = 1.0 - static_cast<double>(k) / M;
      if (w == 0.0) continue;
      const std::complex<double> e(std::cos(k * theta), -std::sin(k * theta));
      s += w * (e * gammas[k] + std::conj(e) * gammas[k].transpose());
    }
    sigma[h] = std::move(s);
  }

  SweepResult res;
  res.values.assign(P, Eigen::MatrixXd::Zero(j_max, G));
  res.traces.assign(P, Eigen::VectorXd::Zero(G));

  const int tasks = P * G;
#pragma omp parallel for schedule(dynamic)
  for (int task = 0; task < tasks; ++task) {
    const int p = task / G;
    const int g = task % G;
    const int m = grid[g];
    const auto& map = perms[p].map;
    Eigen::VectorXd integrated = Eigen::VectorXd::Zero(j_max);
    Eigen::MatrixXcd block(m, m);
    for (int h = 0; h <= M; ++h) {
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) block(a, b) = sigma[h](map[a], map[b]);
      const double mult = (h == 0) ? 1.0 : 2.0;  // lambda(-theta) = lambda(theta)
      integrated += mult * weight * top_eigenvalues_desc(block, j_max);
    }
    res.values[p].col(g) = integrated;
    // integrated trace equals 2 pi x lag-zero trace on this grid
    double tr0 = 0.0;
    for (int a = 0; a < m; ++a) tr0 += gammas[0](map[a], map[a]);
    res.traces[p](g) = 2.0 * std::numbers::pi * tr0;
  }
  return res;
}

Eigen::MatrixXd average_sweep(const std::vector<Eigen::MatrixXd>& per_perm) {
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(per_perm[0].rows(), per_perm[0].cols());
  for (const auto& v : per_perm) avg += v;
  return avg / static_cast<double>(per_perm.size());
}

Eigen::VectorXd average_traces(const std::vector<Eigen::VectorXd>& per_perm) {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(per_perm[0].size());
  for (const auto& v : per_perm) avg += v;
  return avg / static_cast<double>(per_perm.size());
}

namespace ref {

SweepResult static_eigen_sweep(const Panel& p, const std::vector<Permutation>& perms,
                               const std::vector<int>& grid, int j_max) {
  check_sweep_args(p.n(), perms, grid, j_max);
  SweepResult res;
  res.values.assign(perms.size(), Eigen::MatrixXd::Zero(j_max, grid.size()));
  res.traces.assign(perms.size(), Eigen::VectorXd::Zero(grid.size()));
  for (std::size_t pi = 0; pi < perms.size(); ++pi) {
    const Panel permuted = permute(p, perms[pi]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const int m = grid[g];
      Panel sub = Panel::from_data(permuted.data.topRows(m));
      const Eigen::MatrixXd gamma0 = autocovariances(sub, 0).gamma(0);
      res.values[pi].col(static_cast<Eigen::Index>(g)) =
          top_eigenvalues_desc(gamma0, j_max);
      res.traces[pi](static_cast<Eigen::Index>(g)) = gamma0.trace();
    }
  }
  return res;
}

SweepResult dynamic_eigen_sweep(const Panel& p, int M,
                                const std::vector<Permutation>& perms,
                                const std::vector<int>& grid, int j_max) {
  check_sweep_args(p.n(), perms, grid, j_max);
  const double weight = 2.0 * std::numbers::pi / (2 * M + 1);
  SweepResult res;
  res.values.assign(perms.size(), Eigen::MatrixXd::Zero(j_max, grid.size()));
  res.traces.assign(perms.size(), Eigen::VectorXd::Zero(grid.size()));
  for (std::size_t pi = 0; pi < perms.size(); ++pi) {
    const Panel permuted = permute(p, perms[pi]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const int m = grid[g];
      Panel sub = Panel::from_data(permuted.data.topRows(m));
      const SpectralDensity sd = estimate_spectrum(sub, M);
      Eigen::VectorXd integrated = Eigen::VectorXd::Zero(j_max);
      double tr = 0.0;
      for (int h = -M; h <= M; ++h) {
        integrated += weight * top_eigenvalues_desc(sd.at(h), j_max);
        tr += weight * sd.at(h).real().trace();
      }
      res.values[pi].col(static_cast<Eigen::Index>(g)) = integrated;
      res.traces[pi](static_cast<Eigen::Index>(g)) = tr;
    }
  }
  return res;
}

}  // namespace ref

}  // namespace fm
