#include "fm/gdfm.hpp"

#include <cmath>

#include "doctest.h"
#include "fm/kernels.hpp"
#include "fm/moments.hpp"
#include "fm/sim.hpp"
#include "fm/spectra.hpp"
#include "support.hpp"

using namespace fm;

namespace {

double recovery_r2(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  return 1.0 - (est - truth).squaredNorm() / truth.squaredNorm();
}

}  // namespace

TEST_CASE("q = n reproduces the demeaned panel on the valid range") {
  Panel p = standardize(Panel::from_data(testsup::random_gaussian(8, 120, 3)), false);
  const int M = 10;
  DynamicDecomposition d = gdfm_decompose(p, 8, M);
  CHECK(d.t_begin == M);
  CHECK(d.valid_length() == 120 - 2 * M);
  CHECK((d.common - p.data.middleCols(M, d.valid_length())).cwiseAbs().maxCoeff() <=
        1e-10);
  CHECK(d.idio.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("decomposition identity and filter structure") {
  SimOutput out = gen_block_one_factor(30, 400, 17);
  const int M = 12;
  DynamicDecomposition d = gdfm_decompose(out.panel, 1, M);

  SUBCASE("common + idio = panel on the valid range, by construction") {
    const Eigen::MatrixXd slice = out.panel.data.middleCols(M, d.valid_length());
    CHECK((d.idio - (slice - d.common)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.common + d.idio - slice).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("filters are symmetric in k up to transpose") {
    for (int k = 1; k <= M; ++k)
      CHECK((d.filter(-k) - d.filter(k).transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("spectral projectors are idempotent at every grid frequency") {
  SimOutput out = gen_dynamic_loading(16, 300, 5, {1.0, 1.0});
  const int M = 8, q = 2;
  SpectralDensity sd = estimate_spectrum(out.panel, M);
  for (int h = -M; h <= M; ++h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sd.at(h));
    Eigen::MatrixXcd pq = Eigen::MatrixXcd::Zero(16, 16);
    for (int j = 0; j < q; ++j) {
      const auto v = es.eigenvectors().col(15 - j);
      pq += v * v.adjoint();
    }
    CHECK((pq * pq - pq).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("one-factor design: dynamic common component recovers the truth") {
  SimOutput out = gen_block_one_factor(240, 2000, 23);
  const int M = default_bandwidth(2000);
  DynamicDecomposition d = gdfm_decompose(out.panel, 1, M);
  const Eigen::MatrixXd truth = out.true_common.middleCols(d.t_begin, d.valid_length());
  const double mse = (d.common - truth).squaredNorm() / truth.size();
  const double var_chi = truth.squaredNorm() / truth.size();
  CHECK(mse <= 0.2 * var_chi);
}

TEST_CASE("lagged loadings: dynamic beats static in common-component recovery") {
  SimOutput out = gen_dynamic_loading(100, 2000, 29, {1.0, 1.0});
  const int M = default_bandwidth(2000);
  DynamicDecomposition dd = gdfm_decompose(out.panel, 1, M);
  StaticDecomposition sd = static_decompose(out.panel, 1);
  const Eigen::MatrixXd truth = out.true_common.middleCols(dd.t_begin, dd.valid_length());
  const double r2_dyn = recovery_r2(dd.common, truth);
  const double r2_stat =
      recovery_r2(sd.common.middleCols(dd.t_begin, dd.valid_length()), truth);
  CHECK(r2_dyn >= 0.7);
  CHECK(r2_dyn - r2_stat >= 0.05);
}

TEST_CASE("explained variance is monotone in q") {
  SimOutput out = gen_rand_two_factor(30, 500, 31);
  const int M = 10;
  double prev = -1.0;
  for (int q = 1; q <= 4; ++q) {
    DynamicDecomposition d = gdfm_decompose(out.panel, q, M);
    const double explained = d.common.squaredNorm();
    CHECK(explained >= prev - 1e-9);
    prev = explained;
  }
}

TEST_CASE("gdfm decomposition is equivariant under row permutations") {
  SimOutput out = gen_block_one_factor(24, 300, 37);
  const int M = 8;
  Permutation perm = random_permutations(24, 1, 5)[0];
  DynamicDecomposition base = gdfm_decompose(out.panel, 1, M);
  DynamicDecomposition permuted = gdfm_decompose(permute(out.panel, perm), 1, M);
  for (int i = 0; i < 24; ++i) {
    CHECK((permuted.common.row(i) - base.common.row(perm.map[i]))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
  }
}

TEST_CASE("argument validation") {
  Panel p = Panel::from_data(testsup::random_gaussian(6, 60, 1));
  CHECK_THROWS_AS(gdfm_decompose(p, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(gdfm_decompose(p, 7, 5), std::invalid_argument);
  CHECK_THROWS_AS(gdfm_decompose(p, 1, 15), std::invalid_argument);
  CHECK_THROWS_AS(select_q_hl(p, 2, 20, 1), std::invalid_argument);
}

TEST_CASE("cross-covariance between dynamic common and idio stays small") {
  SimOutput out = gen_block_one_factor(240, 2000, 41);
  const int M = default_bandwidth(2000);
  DynamicDecomposition d = gdfm_decompose(out.panel, 1, M);
  // finite-sample proxy of orthogonality at all leads and lags, checked on a
  // subset of rows, normalized by the std-dev product
  const int lags = M / 2;
  const int len = d.valid_length();
  Eigen::MatrixXd chi = d.common.topRows(20);
  Eigen::MatrixXd xi = d.idio.topRows(20);
  for (int i = 0; i < 20; ++i) {
    chi.row(i).array() -= chi.row(i).mean();
    xi.row(i).array() -= xi.row(i).mean();
  }
  double worst = 0.0;
  for (int lag = -lags; lag <= lags; ++lag) {
    const int L = len - std::abs(lag);
    Eigen::MatrixXd cov;
    if (lag >= 0)
      cov = chi.leftCols(L) * xi.rightCols(L).transpose() / static_cast<double>(len);
    else
      cov = chi.rightCols(L) * xi.leftCols(L).transpose() / static_cast<double>(len);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double denom =
            chi.row(i).norm() * xi.row(j).norm() / static_cast<double>(len);
        worst = std::max(worst, std::abs(cov(i, j)) / denom);
      }
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("integrated eigengap diagnostic: common grows, idio bounded") {
  SimOutput small = gen_dynamic_loading(100, 1500, 47, {1.0, 1.0});
  SimOutput large = gen_dynamic_loading(200, 1500, 47, {1.0, 1.0});
  const int M = default_bandwidth(1500);
  auto integ = [&](const Panel& p, int j_max) {
    const CovarianceSet cs = autocovariances(p, M);
    SweepResult full = dynamic_eigen_sweep(
        cs.gammas, M, {Permutation::identity(p.n())}, {p.n()}, j_max);
    return Eigen::VectorXd(full.values[0].col(0));
  };
  Eigen::VectorXd s = integ(small.panel, 2);
  Eigen::VectorXd l = integ(large.panel, 2);
  CHECK(l(0) >= 1.7 * s(0));        // q-th integrated eigenvalue diverges
  CHECK(l(1) <= 2.0 * s(1) + 1.0);  // (q+1)-th stays bounded
  // integrated eigengap between j=1 and j=2 grows with n
  CHECK(l(0) - l(1) >= 1.7 * (s(0) - s(1)));
}

TEST_CASE("HL selection: single-seed regressions") {
  SUBCASE("white noise selects zero") {
    SimOutput out = gen_white_noise(80, 1000, 53);
    TunedSelection sel = select_q_hl(out.panel, 8, default_bandwidth(1000), 4);
    CHECK(sel.count == 0);
  }
  SUBCASE("one white-noise factor selects one") {
    SimOutput out = gen_block_one_factor(90, 1000, 59);
    TunedSelection sel = select_q_hl(out.panel, 8, default_bandwidth(1000), 4);
    CHECK(sel.count == 1);
  }
  SUBCASE("selected count is non-increasing in c at every m") {
    SimOutput out = gen_dynamic_loading(60, 800, 61, {1.0, 1.0});
    TunedSelection sel = select_q_hl(out.panel, 6, default_bandwidth(800), 4, 8);
    const auto& s = sel.surface;
    for (Eigen::Index mi = 0; mi < s.selected.rows(); ++mi)
      for (Eigen::Index ci = 0; ci + 1 < s.c_grid.size(); ++ci)
        CHECK(s.selected(mi, ci) >= s.selected(mi, ci + 1));
  }
}

TEST_CASE("filters export") {
  SimOutput out = gen_block_one_factor(9, 200, 67);
  DynamicDecomposition d = gdfm_decompose(out.panel, 1, 6);
  testsup::TempDir dir;
  const auto path = dir.path() / "filters.csv";
  write_filters_csv(d, path);
  CHECK(std::filesystem::file_size(path) > 0);
}
