#include "fm/spectra.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fm/csv.hpp"
#include "fm/kernels.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double SpectralDensity::theta(int h) const {
  return 2.0 * std::numbers::pi * h / grid_size();
}

int default_bandwidth(int T) {
  return static_cast<int>(std::floor(0.75 * std::sqrt(static_cast<double>(T))));
}

SpectralDensity spectrum_from_covariances(const CovarianceSet& cs, int M) {
  require(M >= 1, "spectrum: M must be >= 1");
  require(cs.K >= M, "spectrum: covariance set needs lags 0..M");
  SpectralDensity sd;
  sd.n = cs.n;
  sd.M = M;
  sd.mats.resize(2 * M + 1);
#pragma omp parallel for schedule(static)
  for (int h = -M; h <= M; ++h) {
    const double theta = 2.0 * std::numbers::pi * h / (2 * M + 1);
    Eigen::MatrixXcd s = cs.gamma(0).cast<std::complex<double>>();
    for (int k = 1; k <= M; ++k) {
      const double w = 1.0 - static_cast<double>(k) / M;
      if (w == 0.0) continue;
      const std::complex<double> e(std::cos(k * theta), -std::sin(k * theta));
      // Gamma_{-k} = Gamma_k'
      s += w * (e * cs.gamma(k) + std::conj(e) * cs.gamma(k).transpose());
    }
    sd.mats[h + M] = std::move(s);
  }
  return sd;
}

SpectralDensity estimate_spectrum(const Panel& p, int M) {
  require(M >= 1 && M < p.T() / 4.0, "spectrum: need 1 <= M < T/4");
  return spectrum_from_covariances(autocovariances(p, M), M);
}

DynamicEigenSystem dynamic_eigens(const SpectralDensity& sd, int j_max) {
  require(j_max >= 1 && j_max <= sd.n, "dynamic_eigens: need 1 <= j_max <= n");
  const int F = sd.grid_size();
  for (const auto& m : sd.mats) {
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    require((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-8 * scale,
            "dynamic_eigens: spectral matrix is not Hermitian within tolerance");
  }
  DynamicEigenSystem sys;
  sys.M = sd.M;
  sys.j_max = j_max;
  sys.values.resize(j_max, F);
  sys.vectors.assign(F, Eigen::MatrixXcd());

#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < F; ++idx) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sd.mats[idx]);
    const double clip = 1e-8 * std::abs(es.eigenvalues().sum());
    Eigen::MatrixXcd vecs(sd.n, j_max);
    for (int j = 0; j < j_max; ++j) {
      double v = es.eigenvalues()(sd.n - 1 - j);
      if (v < 0.0 && v >= -clip) v = 0.0;
      sys.values(j, idx) = v;
      vecs.col(j) = es.eigenvectors().col(sd.n - 1 - j);
    }
    sys.vectors[idx] = std::move(vecs);
  }
  const double weight = 2.0 * std::numbers::pi / F;
  sys.integrated = weight * sys.values.rowwise().sum();
  return sys;
}

double eigengap_fraction(const DynamicEigenSystem& sys, int j, double threshold) {
  require(j >= 0 && j + 1 < sys.values.rows(),
          "eigengap_fraction: need j + 1 tracked eigenvalues");
  int count = 0;
  for (Eigen::Index idx = 0; idx < sys.values.cols(); ++idx)
    count += (sys.values(j, idx) - sys.values(j + 1, idx)) > threshold;
  return static_cast<double>(count) / sys.values.cols();
}

EigenTrajectory dynamic_eigen_trajectory(const Panel& p,
                                         const std::vector<Permutation>& perms,
                                         int j_max, const std::vector<int>& grid,
                                         int M, const TrajectoryOptions& opts) {
  require(M >= 1 && M < p.T() / 4.0, "dynamic trajectory: need 1 <= M < T/4");
  SweepResult sweep;
  if (opts.use_reference_kernel) {
    sweep = ref::dynamic_eigen_sweep(p, M, perms, grid, j_max);
  } else {
    const CovarianceSet cs = autocovariances(p, M);
    sweep = dynamic_eigen_sweep(cs.gammas, M, perms, grid, j_max);
  }
  EigenTrajectory traj;
  traj.sizes = grid;
  traj.values = average_sweep(sweep.values);
  traj.n_permutations = static_cast<int>(sweep.values.size());
  if (opts.normalize || opts.keep_permutation_values) {
    double l1 = 1.0;
    if (opts.normalize) {
      // full-panel integrated top eigenvalue (permutation invariant)
      const CovarianceSet cs = autocovariances(p, M);
      SweepResult full = dynamic_eigen_sweep(
          cs.gammas, M, {Permutation::identity(p.n())}, {p.n()}, 1);
      l1 = full.values[0](0, 0);
      require(l1 > 0.0, "dynamic trajectory: cannot normalize by zero eigenvalue");
      traj.normalization = l1;
      traj.values /= l1;
    }
    if (opts.keep_permutation_values) {
      traj.per_permutation = sweep.values;
      if (opts.normalize)
        for (auto& v : traj.per_permutation) v /= l1;
    }
  }
  return traj;
}

void write_spectrum_csv(const DynamicEigenSystem& sys,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write spectrum CSV: " + path.string());
  out << "h,theta,j,lambda\n";
  const int F = 2 * sys.M + 1;
  for (int h = -sys.M; h <= sys.M; ++h) {
    const double theta = 2.0 * std::numbers::pi * h / F;
    for (int j = 0; j < sys.values.rows(); ++j) {
      out << h << ',' << csv::format_double(theta) << ',' << (j + 1) << ','
          << csv::format_double(sys.values(j, h + sys.M)) << '\n';
    }
  }
}

namespace {
constexpr char kMagic[8] = {'F', 'M', 'S', 'P', 'D', 'M', '0', '1'};
}

void write_spectrum_binary(const SpectralDensity& sd,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write spectrum file: " + path.string());
  out.write(kMagic, 8);
  const std::uint32_t n = static_cast<std::uint32_t>(sd.n);
  const std::uint32_t M = static_cast<std::uint32_t>(sd.M);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&M), 4);
  for (const auto& mat : sd.mats) {
    for (int i = 0; i < sd.n; ++i) {
      for (int j = 0; j < sd.n; ++j) {
        const double re = mat(i, j).real(), im = mat(i, j).imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
      }
    }
  }
}

SpectralDensity read_spectrum_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open spectrum file: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a spectrum file: " + path.string());
  std::uint32_t n = 0, M = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&M), 4);
  SpectralDensity sd;
  sd.n = static_cast<int>(n);
  sd.M = static_cast<int>(M);
  sd.mats.assign(2 * sd.M + 1, Eigen::MatrixXcd(sd.n, sd.n));
  for (auto& mat : sd.mats) {
    for (int i = 0; i < sd.n; ++i) {
      for (int j = 0; j < sd.n; ++j) {
        double re = 0, im = 0;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        mat(i, j) = {re, im};
      }
    }
  }
  if (!in) throw std::runtime_error("truncated spectrum file: " + path.string());
  return sd;
}

}  // namespace fm
