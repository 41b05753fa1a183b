#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fm/panel.hpp"

namespace fm {

enum class Dgp {
  block_one_factor,   // B in three equal blocks (0.25, 1, c), B'B/n = 1
  rand_one_factor,    // loadings B_i * u_i, u_i ~ N(0,1)
  rand_two_factor,    // B_i u_i1 and B_i u_i2, Var(u_1) = 1, Var(u_2) = 0.5
  dynamic_loading,    // sum_j sum_l lag_coeffs[l] b_ilj f_{j,t-l} + eps
  white_noise,
};

std::string dgp_name(Dgp d);
Dgp dgp_from_name(const std::string& s);

struct SimConfig {
  Dgp dgp = Dgp::block_one_factor;
  int n = 240;
  int T = 100;
  std::uint64_t seed = 1;
  int num_factors = 1;                       // dynamic_loading only
  std::vector<double> lag_coeffs = {1.0, 1.0};  // dynamic_loading only
};

struct SimOutput {
  Panel panel;
  Eigen::MatrixXd true_common;   // n x T
  Eigen::MatrixXd true_idio;     // n x T
  Eigen::MatrixXd true_factors;  // k x T
  // Effective contemporaneous loadings per factor column; for dynamic_loading
  // the columns are grouped (factor 1 lags 0..L-1, factor 2 lags 0..L-1, ...).
  Eigen::MatrixXd true_loadings;
  // Population projection of X onto the top covariance eigenvector's factor
  // (rank-one static common); zero matrix for white noise.
  Eigen::MatrixXd true_stat_common;
  SimConfig config;
};

SimOutput simulate(const SimConfig& cfg);

SimOutput gen_block_one_factor(int n, int T, std::uint64_t seed);
SimOutput gen_rand_one_factor(int n, int T, std::uint64_t seed);
SimOutput gen_rand_two_factor(int n, int T, std::uint64_t seed);
SimOutput gen_dynamic_loading(int n, int T, std::uint64_t seed,
                              const std::vector<double>& lag_coeffs = {1.0, 1.0},
                              int num_factors = 1);
SimOutput gen_white_noise(int n, int T, std::uint64_t seed);

// Block loading pattern of the one-factor design: n/3 entries at 0.25, n/3 at
// 1, n/3 at c with c chosen so that B'B/n = 1 exactly.
Eigen::VectorXd block_loadings(int n);
double block_loading_scale(int n);  // the constant c

// Population lag-zero covariance implied by the generator's loadings:
// sum of outer products of effective loading columns plus the identity.
Eigen::MatrixXd population_covariance(const SimOutput& out);

}  // namespace fm
