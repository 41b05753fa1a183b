#include "fm/gdfm.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fm/csv.hpp"
#include "fm/kernels.hpp"
#include "fm/moments.hpp"
#include "fm/spectra.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

DynamicDecomposition gdfm_decompose(const Panel& p, int q, int M) {
  const int n = p.n(), T = p.T();
  require(q >= 1 && q <= n, "gdfm_decompose: need 1 <= q <= n");
  require(M >= 1 && M < T / 4.0, "gdfm_decompose: need 1 <= M < T/4");
  require(T > 2 * M + 1, "gdfm_decompose: need T > 2M+1");

  const SpectralDensity sd = estimate_spectrum(p, M);
  const int F = sd.grid_size();

  // rank-q projectors on the non-negative half grid; P(-theta) = conj(P(theta))
  std::vector<Eigen::MatrixXcd> proj(M + 1);
#pragma omp parallel for schedule(static)
  for (int h = 0; h <= M; ++h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sd.at(h));
    Eigen::MatrixXcd pq = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < q; ++j) {
      const auto v = es.eigenvectors().col(n - 1 - j);
      pq.noalias() += v * v.adjoint();
    }
    proj[h] = std::move(pq);
  }

  // filter coefficients K_k = (1/F) sum_h P(theta_h) exp(i k theta_h); the
  // conjugate-symmetric grid makes them real, the imaginary residual is
  // checked and discarded.
  DynamicDecomposition d;
  d.q = q;
  d.M = M;
  d.t_begin = M;
  d.filters.assign(F, Eigen::MatrixXd());
  double max_imag = 0.0, max_real = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_imag, max_real)
  for (int k = -M; k <= M; ++k) {
    Eigen::MatrixXcd acc = proj[0];
    for (int h = 1; h <= M; ++h) {
      const double phase = 2.0 * std::numbers::pi * h * k / F;
      const std::complex<double> e(std::cos(phase), std::sin(phase));
      acc += e * proj[h] + std::conj(e) * proj[h].conjugate();
    }
    acc /= static_cast<double>(F);
    max_imag = std::max(max_imag, acc.imag().cwiseAbs().maxCoeff());
    max_real = std::max(max_real, acc.real().cwiseAbs().maxCoeff());
    d.filters[k + M] = acc.real();
  }
  if (max_imag > 1e-9 * std::max(max_real, 1e-300))
    throw std::runtime_error("gdfm_decompose: filter coefficients are not real");

  Eigen::MatrixXd x = p.data;
  for (int i = 0; i < n; ++i) x.row(i).array() -= p.data.row(i).mean();

  const int len = T - 2 * M;
  Eigen::MatrixXd common = Eigen::MatrixXd::Zero(n, len);
  for (int k = -M; k <= M; ++k)
    common.noalias() += d.filter(k) * x.middleCols(M - k, len);
  d.common = std::move(common);
  d.idio = p.data.middleCols(M, len) - d.common;
  return d;
}

TunedSelection select_q_hl(const Panel& p, const std::vector<Permutation>& perms,
                           int q_max, const Eigen::VectorXd& c_grid,
                           const std::vector<int>& m_grid, int M) {
  require(M >= 1 && M < p.T() / 4.0, "select_q_hl: need 1 <= M < T/4");
  const CovarianceSet cs = autocovariances(p, M);
  SweepResult sweep = dynamic_eigen_sweep(cs.gammas, M, perms, m_grid, q_max);
  const Eigen::MatrixXd avg = average_sweep(sweep.values);
  const Eigen::VectorXd traces = average_traces(sweep.traces);
  Eigen::VectorXd level(m_grid.size());
  for (std::size_t g = 0; g < m_grid.size(); ++g)
    level(static_cast<Eigen::Index>(g)) =
        traces(static_cast<Eigen::Index>(g)) / m_grid[g];
  const int T = p.T();
  TunedSelection sel;
  sel.surface =
      tune_penalized_count(avg, level, m_grid, c_grid, q_max,
                           [T, M](int m) { return dynamic_penalty(m, T, M); });
  sel.count = sel.surface.chosen;
  return sel;
}

TunedSelection select_q_hl(const Panel& p, int q_max, int M, std::uint64_t seed,
                           int n_permutations) {
  return select_q_hl(p, content_keyed_permutations(p, n_permutations, seed), q_max,
                     default_c_grid(), default_m_grid(p.n()), M);
}

void write_filters_csv(const DynamicDecomposition& d,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write filters CSV: " + path.string());
  out << "i,j,k,coefficient\n";
  for (int k = -d.M; k <= d.M; ++k) {
    const Eigen::MatrixXd& f = d.filter(k);
    for (Eigen::Index i = 0; i < f.rows(); ++i)
      for (Eigen::Index j = 0; j < f.cols(); ++j)
        out << (i + 1) << ',' << (j + 1) << ',' << k << ','
            << csv::format_double(f(i, j)) << '\n';
  }
}

}  // namespace fm
