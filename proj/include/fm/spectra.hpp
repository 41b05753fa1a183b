#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "fm/moments.hpp"
#include "fm/panel.hpp"

namespace fm {

// Bartlett lag-window estimate of the spectral density matrix on the grid
// theta_h = 2 pi h / (2M+1), h = -M..M.  Follows the convention
// Sigma(theta) = sum_k Gamma_k exp(-i k theta) with no 1/(2 pi) prefactor,
// so (1/(2M+1)) sum_h Sigma(theta_h) = Gamma_0 exactly.
struct SpectralDensity {
  int n = 0;
  int M = 0;
  std::string kernel = "bartlett";
  std::vector<Eigen::MatrixXcd> mats;  // index h + M

  double theta(int h) const;
  const Eigen::MatrixXcd& at(int h) const { return mats.at(h + M); }
  int grid_size() const { return 2 * M + 1; }
};

int default_bandwidth(int T);  // floor(0.75 sqrt(T))

SpectralDensity estimate_spectrum(const Panel& p, int M);
SpectralDensity spectrum_from_covariances(const CovarianceSet& cs, int M);

// Hermitian eigenstructure per frequency; eigenvalues sorted descending and
// clipped at zero, integrated by Riemann sum with weight 2 pi / (2M+1).
struct DynamicEigenSystem {
  int M = 0;
  int j_max = 0;
  Eigen::MatrixXd values;                 // j_max x (2M+1), column h + M
  std::vector<Eigen::MatrixXcd> vectors;  // per frequency: n x j_max
  Eigen::VectorXd integrated;             // j_max
};

DynamicEigenSystem dynamic_eigens(const SpectralDensity& sd, int j_max);

// Divergence diagnostic on a finite grid: the fraction of grid frequencies
// where lambda_j(theta) - lambda_{j+1}(theta) exceeds the threshold.  j is
// 0-based; requires j + 1 < j_max of the system.
double eigengap_fraction(const DynamicEigenSystem& sys, int j, double threshold);

// Integrated dynamic eigenvalues of leading-m sub-panels, permutation
// averaged; same layout as the static trajectory.
EigenTrajectory dynamic_eigen_trajectory(const Panel& p,
                                         const std::vector<Permutation>& perms,
                                         int j_max, const std::vector<int>& grid,
                                         int M, const TrajectoryOptions& opts = {});

// CSV rows: h, theta, j (1-based), lambda_j(theta_h).
void write_spectrum_csv(const DynamicEigenSystem& sys,
                        const std::filesystem::path& path);

// Binary layout: 16-byte header (8-byte magic "FMSPDM01", uint32 n, uint32 M)
// followed by the 2M+1 matrices for h = -M..M, row-major complex doubles,
// little endian.
void write_spectrum_binary(const SpectralDensity& sd,
                           const std::filesystem::path& path);
SpectralDensity read_spectrum_binary(const std::filesystem::path& path);

}  // namespace fm
