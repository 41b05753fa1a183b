#include "fm/weakdecomp.hpp"

#include <cmath>

#include "doctest.h"
#include "fm/sim.hpp"
#include "fm/spectra.hpp"
#include "support.hpp"

using namespace fm;

TEST_CASE("three-term identity holds exactly on the valid range") {
  SimOutput out = gen_rand_two_factor(30, 400, 3);
  const int M = 10;
  ThreeTermDecomposition d = three_term(out.panel, 2, 2, M);
  const Eigen::MatrixXd slice = out.panel.data.middleCols(d.t_begin, d.valid_length());
  CHECK((d.stat_common + d.weak_common + d.dyn_idio - slice).cwiseAbs().maxCoeff() <=
        1e-9);
}

TEST_CASE("q = r = n collapses the weak and idio parts to zero") {
  Panel p = standardize(Panel::from_data(testsup::random_gaussian(7, 150, 5)), false);
  ThreeTermDecomposition d = three_term(p, 7, 7, 8);
  CHECK(d.weak_common.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(d.dyn_idio.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("contemporaneous design leaves almost no weakly common part") {
  SimOutput out = gen_block_one_factor(240, 2000, 7);
  ThreeTermDecomposition d = three_term(out.panel, 1, 1, default_bandwidth(2000));
  const Eigen::MatrixXd slice = out.panel.data.middleCols(d.t_begin, d.valid_length());
  const double share = d.weak_common.squaredNorm() / slice.squaredNorm();
  CHECK(share <= 0.1);
}

TEST_CASE("lagged loadings produce a sizeable weakly common part") {
  SimOutput out = gen_dynamic_loading(100, 2000, 9, {1.0, 1.0});
  ThreeTermDecomposition d = three_term(out.panel, 1, 1, default_bandwidth(2000));
  const Eigen::MatrixXd slice = out.panel.data.middleCols(d.t_begin, d.valid_length());
  const double share = d.weak_common.squaredNorm() / slice.squaredNorm();
  CHECK(share >= 0.05);
}

TEST_CASE("static common never explains more than the dynamic common") {
  SimOutput out = gen_dynamic_loading(60, 1200, 11, {1.0, 1.0});
  ThreeTermDecomposition d = three_term(out.panel, 1, 1, default_bandwidth(1200));
  const Eigen::MatrixXd slice = out.panel.data.middleCols(d.t_begin, d.valid_length());
  const Eigen::MatrixXd dyn_common = d.stat_common + d.weak_common;
  CHECK(d.stat_common.squaredNorm() <=
        dyn_common.squaredNorm() + 1e-6 * slice.squaredNorm());
}

TEST_CASE("orthogonality report") {
  SUBCASE("white noise: flagged common-idio correlations below threshold") {
    SimOutput out = gen_white_noise(20, 5000, 13);
    ThreeTermDecomposition d = three_term(out.panel, 1, 1, default_bandwidth(5000));
    OrthogonalityReport rep = orthogonality_report(d, 8);
    CHECK(rep.entries[0].max_abs_corr < 0.1);  // stat common vs stat idio
    CHECK(rep.contemporaneous_orthogonality);
    CHECK(rep.all_leads_lags_orthogonality);
  }
  SUBCASE("dynamic design: variant A holds, variant B fails") {
    SimOutput out = gen_dynamic_loading(100, 2000, 17, {1.0, 1.0});
    ThreeTermDecomposition d = three_term(out.panel, 1, 1, default_bandwidth(2000));
    OrthogonalityReport rep = orthogonality_report(d, 8);
    CHECK(rep.contemporaneous_orthogonality);
    CHECK_FALSE(rep.all_leads_lags_orthogonality);
    CHECK(rep.entries[0].at_lag != 0);
  }
  SUBCASE("lag-0 static orthogonality is exact by construction") {
    SimOutput out = gen_rand_one_factor(45, 600, 19);
    ThreeTermDecomposition d = three_term(out.panel, 1, 1, 10);
    // recompute the raw lag-0 cross-covariance between stat common and the
    // static idio on the full sample (the PCA construction zeroes it)
    StaticDecomposition sd = static_decompose(out.panel, 1);
    Eigen::MatrixXd c = sd.common, x = sd.idio;
    for (int i = 0; i < 45; ++i) {
      c.row(i).array() -= c.row(i).mean();
      x.row(i).array() -= x.row(i).mean();
    }
    CHECK((c * x.transpose() / out.panel.T()).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("max_lag validation") {
    SimOutput out = gen_white_noise(10, 200, 23);
    ThreeTermDecomposition d = three_term(out.panel, 1, 1, 8);
    CHECK_THROWS_AS(orthogonality_report(d, 180), std::invalid_argument);
  }
}

TEST_CASE("report serializes to JSON") {
  SimOutput out = gen_white_noise(20, 400, 29);
  ThreeTermDecomposition d = three_term(out.panel, 1, 1, 8);
  OrthogonalityReport rep = orthogonality_report(d, 4);
  nlohmann::json j = to_json(rep);
  CHECK(j.contains("pairs"));
  CHECK(j["pairs"].size() == 4);
  CHECK(j.contains("contemporaneous_orthogonality"));
}
