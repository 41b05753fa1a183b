#include "fm/sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fm/rng.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  auto eng = rng::engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(eng);
  return m;
}

Panel make_panel(Eigen::MatrixXd data) { return Panel::from_data(std::move(data)); }

// Rank-one population static common: v1 v1' X with v1 the top eigenvector of
// the population covariance.
Eigen::MatrixXd rank_one_stat_common(const Eigen::MatrixXd& pop_cov,
                                     const Eigen::MatrixXd& panel_data) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pop_cov);
  Eigen::VectorXd v1 = es.eigenvectors().col(pop_cov.rows() - 1);
  return v1 * (v1.transpose() * panel_data);
}

}  // namespace

std::string dgp_name(Dgp d) {
  switch (d) {
    case Dgp::block_one_factor: return "block_one_factor";
    case Dgp::rand_one_factor: return "rand_one_factor";
    case Dgp::rand_two_factor: return "rand_two_factor";
    case Dgp::dynamic_loading: return "dynamic_loading";
    case Dgp::white_noise: return "white_noise";
  }
  throw std::logic_error("unreachable");
}

Dgp dgp_from_name(const std::string& s) {
  if (s == "block_one_factor") return Dgp::block_one_factor;
  if (s == "rand_one_factor") return Dgp::rand_one_factor;
  if (s == "rand_two_factor") return Dgp::rand_two_factor;
  if (s == "dynamic_loading") return Dgp::dynamic_loading;
  if (s == "white_noise") return Dgp::white_noise;
  throw std::invalid_argument("unknown DGP: " + s);
}

double block_loading_scale(int n) {
  require(n >= 3 && n % 3 == 0, "block one-factor design needs n divisible by 3");
  const double b = static_cast<double>(n) / 3.0;
  return std::sqrt((n - b * (0.0625 + 1.0)) / b);
}

Eigen::VectorXd block_loadings(int n) {
  const double c = block_loading_scale(n);
  const int b = n / 3;
  Eigen::VectorXd B(n);
  B.head(b).setConstant(0.25);
  B.segment(b, b).setConstant(1.0);
  B.tail(b).setConstant(c);
  return B;
}

namespace {

SimOutput factor_panel(const SimConfig& cfg, const Eigen::MatrixXd& loadings) {
  const int n = cfg.n, T = cfg.T;
  const int k = static_cast<int>(loadings.cols());
  Eigen::MatrixXd f =
      gaussian_matrix(k, T, rng::derive(cfg.seed, rng::kSimFactors, 0));
  Eigen::MatrixXd eps =
      gaussian_matrix(n, T, rng::derive(cfg.seed, rng::kSimNoise, 0));
  SimOutput out;
  out.true_common = loadings * f;
  out.true_idio = eps;
  out.true_factors = f;
  out.true_loadings = loadings;
  out.panel = make_panel(out.true_common + out.true_idio);
  out.config = cfg;
  out.true_stat_common = rank_one_stat_common(
      loadings * loadings.transpose() +
          Eigen::MatrixXd::Identity(n, n),
      out.panel.data);
  return out;
}

}  // namespace

SimOutput simulate(const SimConfig& cfg) {
  require(cfg.n >= 1 && cfg.T >= 2, "simulate: n >= 1 and T >= 2 required");
  switch (cfg.dgp) {
    case Dgp::block_one_factor: {
      Eigen::MatrixXd L = block_loadings(cfg.n);
      return factor_panel(cfg, L);
    }
    case Dgp::rand_one_factor: {
      Eigen::VectorXd B = block_loadings(cfg.n);
      Eigen::VectorXd u =
          gaussian_matrix(cfg.n, 1, rng::derive(cfg.seed, rng::kSimLoadings, 0));
      Eigen::MatrixXd L = (B.array() * u.array()).matrix();
      return factor_panel(cfg, L);
    }
    case Dgp::rand_two_factor: {
      Eigen::VectorXd B = block_loadings(cfg.n);
      Eigen::VectorXd u1 =
          gaussian_matrix(cfg.n, 1, rng::derive(cfg.seed, rng::kSimLoadings, 0));
      Eigen::VectorXd u2 =
          gaussian_matrix(cfg.n, 1, rng::derive(cfg.seed, rng::kSimLoadings, 1));
      u2 *= std::sqrt(0.5);  // Var(u_2) = 0.5
      Eigen::MatrixXd L(cfg.n, 2);
      L.col(0) = B.array() * u1.array();
      L.col(1) = B.array() * u2.array();
      return factor_panel(cfg, L);
    }
    case Dgp::white_noise: {
      SimOutput out;
      out.true_idio =
          gaussian_matrix(cfg.n, cfg.T, rng::derive(cfg.seed, rng::kSimNoise, 0));
      out.true_common = Eigen::MatrixXd::Zero(cfg.n, cfg.T);
      out.true_factors = Eigen::MatrixXd::Zero(0, cfg.T);
      out.true_loadings = Eigen::MatrixXd::Zero(cfg.n, 0);
      out.true_stat_common = Eigen::MatrixXd::Zero(cfg.n, cfg.T);
      out.panel = make_panel(out.true_idio);
      out.config = cfg;
      return out;
    }
    case Dgp::dynamic_loading: {
      const int q = cfg.num_factors;
      const int L = static_cast<int>(cfg.lag_coeffs.size());
      require(q >= 1, "dynamic_loading: num_factors >= 1");
      require(L >= 1, "dynamic_loading: lag_coeffs must be non-empty");
      const int n = cfg.n, T = cfg.T;
      // factor paths include L-1 pre-sample values so the panel is stationary
      Eigen::MatrixXd f_full =
          gaussian_matrix(q, T + L - 1, rng::derive(cfg.seed, rng::kSimFactors, 0));
      Eigen::MatrixXd eps =
          gaussian_matrix(n, T, rng::derive(cfg.seed, rng::kSimNoise, 0));
      Eigen::MatrixXd loadings(n, q * L);
      for (int j = 0; j < q; ++j) {
        Eigen::MatrixXd b = gaussian_matrix(
            n, L, rng::derive(cfg.seed, rng::kSimLoadings, static_cast<std::uint64_t>(j)));
        for (int l = 0; l < L; ++l) loadings.col(j * L + l) = cfg.lag_coeffs[l] * b.col(l);
      }
      Eigen::MatrixXd common = Eigen::MatrixXd::Zero(n, T);
      for (int j = 0; j < q; ++j)
        for (int l = 0; l < L; ++l)
          common += loadings.col(j * L + l) *
                    f_full.row(j).segment(L - 1 - l, T);
      SimOutput out;
      out.true_common = common;
      out.true_idio = eps;
      out.true_factors = f_full.rightCols(T);
      out.true_loadings = loadings;
      out.panel = make_panel(common + eps);
      out.config = cfg;
      out.true_stat_common = rank_one_stat_common(
          loadings * loadings.transpose() + Eigen::MatrixXd::Identity(n, n),
          out.panel.data);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

SimOutput gen_block_one_factor(int n, int T, std::uint64_t seed) {
  return simulate({Dgp::block_one_factor, n, T, seed});
}
SimOutput gen_rand_one_factor(int n, int T, std::uint64_t seed) {
  return simulate({Dgp::rand_one_factor, n, T, seed});
}
SimOutput gen_rand_two_factor(int n, int T, std::uint64_t seed) {
  return simulate({Dgp::rand_two_factor, n, T, seed});
}
SimOutput gen_dynamic_loading(int n, int T, std::uint64_t seed,
                              const std::vector<double>& lag_coeffs, int num_factors) {
  SimConfig cfg{Dgp::dynamic_loading, n, T, seed, num_factors, lag_coeffs};
  return simulate(cfg);
}
SimOutput gen_white_noise(int n, int T, std::uint64_t seed) {
  return simulate({Dgp::white_noise, n, T, seed});
}

Eigen::MatrixXd population_covariance(const SimOutput& out) {
  const int n = out.panel.n();
  return out.true_loadings * out.true_loadings.transpose() +
         Eigen::MatrixXd::Identity(n, n);
}

}  // namespace fm
