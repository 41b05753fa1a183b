#include "fm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fm/csv.hpp"
#include "fm/kernels.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::MatrixXd demeaned(const Panel& p) {
  Eigen::MatrixXd x = p.data;
  for (int i = 0; i < p.n(); ++i) x.row(i).array() -= p.data.row(i).mean();
  return x;
}

}  // namespace

CovarianceSet autocovariances(const Panel& p, int K) {
  require(K >= 0, "autocovariances: K must be >= 0");
  require(K < p.T(), "autocovariances: K must be smaller than T");
  const Eigen::MatrixXd x = demeaned(p);
  const double T = static_cast<double>(p.T());
  CovarianceSet cs;
  cs.n = p.n();
  cs.T = p.T();
  cs.K = K;
  cs.gammas.resize(K + 1);
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= K; ++k) {
    cs.gammas[k] =
        (x.rightCols(p.T() - k) * x.leftCols(p.T() - k).transpose()) / T;
  }
  return cs;
}

SymEigen eigen_sym(const Eigen::MatrixXd& G) {
  require(G.rows() == G.cols(), "eigen_sym: matrix must be square");
  require(G.allFinite(), "eigen_sym: matrix has non-finite entries");
  const double scale = G.cwiseAbs().maxCoeff();
  require((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * std::max(scale, 1.0),
          "eigen_sym: matrix is not symmetric within tolerance");
  const Eigen::MatrixXd S = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const int n = static_cast<int>(S.rows());
  SymEigen out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  for (int j = 0; j < n; ++j) {
    int arg = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.vectors(arg, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
  }
  return out;
}

std::vector<int> default_size_grid(int n) {
  std::vector<int> grid;
  if (n <= 512) {
    for (int m = 1; m <= n; ++m) grid.push_back(m);
    return grid;
  }
  const double lo = std::log(1.0), hi = std::log(static_cast<double>(n));
  int prev = 0;
  for (int i = 0; i < 64; ++i) {
    int m = static_cast<int>(std::lround(std::exp(lo + (hi - lo) * i / 63.0)));
    m = std::clamp(m, 1, n);
    if (m > prev) grid.push_back(m), prev = m;
  }
  if (grid.back() != n) grid.push_back(n);
  return grid;
}

namespace {

EigenTrajectory assemble(const SweepResult& sweep, const std::vector<int>& grid,
                         double full_lambda1, const TrajectoryOptions& opts) {
  EigenTrajectory traj;
  traj.sizes = grid;
  traj.values = average_sweep(sweep.values);
  traj.n_permutations = static_cast<int>(sweep.values.size());
  if (opts.normalize) {
    require(full_lambda1 > 0.0, "trajectory: cannot normalize by zero eigenvalue");
    traj.normalization = full_lambda1;
    traj.values /= full_lambda1;
  }
  if (opts.keep_permutation_values) {
    traj.per_permutation = sweep.values;
    if (opts.normalize)
      for (auto& v : traj.per_permutation) v /= full_lambda1;
  }
  return traj;
}

}  // namespace

EigenTrajectory eigenvalue_trajectory(const Panel& p,
                                      const std::vector<Permutation>& perms,
                                      int j_max, const std::vector<int>& grid,
                                      const TrajectoryOptions& opts) {
  if (opts.use_reference_kernel) {
    SweepResult sweep = ref::static_eigen_sweep(p, perms, grid, j_max);
    const Eigen::MatrixXd gamma0 = autocovariances(p, 0).gamma(0);
    const double l1 = eigen_sym(gamma0).values(0);
    return assemble(sweep, grid, l1, opts);
  }
  const Eigen::MatrixXd gamma0 = autocovariances(p, 0).gamma(0);
  SweepResult sweep = static_eigen_sweep(gamma0, perms, grid, j_max);
  const double l1 = eigen_sym(gamma0).values(0);
  return assemble(sweep, grid, l1, opts);
}

EigenTrajectory eigenvalue_trajectory_from_cov(const Eigen::MatrixXd& gamma0,
                                               const std::vector<Permutation>& perms,
                                               int j_max, const std::vector<int>& grid,
                                               const TrajectoryOptions& opts) {
  SweepResult sweep = static_eigen_sweep(gamma0, perms, grid, j_max);
  const double l1 = eigen_sym(gamma0).values(0);
  return assemble(sweep, grid, l1, opts);
}

LinearFit linear_growth_fit(const EigenTrajectory& traj, int j) {
  require(j >= 0 && j < traj.values.rows(), "linear_growth_fit: j out of range");
  const int min_m = std::max(j + 1, 10);
  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < traj.sizes.size(); ++g) {
    if (traj.sizes[g] >= min_m) {
      xs.push_back(static_cast<double>(traj.sizes[g]));
      ys.push_back(traj.values(j, static_cast<Eigen::Index>(g)));
    }
  }
  require(xs.size() >= 3, "linear_growth_fit: degenerate grid (need >= 3 sizes)");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  require(det > 0.0, "linear_growth_fit: degenerate grid (no size variation)");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ssr = 0, sst = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - fit.intercept - fit.slope * xs[i];
    ssr += e * e;
    sst += (ys[i] - ybar) * (ys[i] - ybar);
  }
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  return fit;
}

void write_trajectory_csv(const EigenTrajectory& traj,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory CSV: " + path.string());
  out << "permutation_id,j,m,value\n";
  auto dump = [&](const std::string& id, const Eigen::MatrixXd& v) {
    for (Eigen::Index j = 0; j < v.rows(); ++j)
      for (std::size_t g = 0; g < traj.sizes.size(); ++g) {
        if (j >= traj.sizes[g]) continue;
        out << id << ',' << (j + 1) << ',' << traj.sizes[g] << ','
            << csv::format_double(v(j, static_cast<Eigen::Index>(g))) << '\n';
      }
  };
  for (std::size_t p = 0; p < traj.per_permutation.size(); ++p)
    dump(std::to_string(p), traj.per_permutation[p]);
  dump("avg", traj.values);
}

}  // namespace fm
