// End-to-end rehearsal of the empirical pipeline at monthly-macro scale:
// a synthetic 126-series, 780-observation panel with eight factors of
// decaying strength, written to CSV with an embedded transform row, then
// ingested, permutation-averaged, and run through factor-number selection.

#include <fstream>
#include <random>

#include "doctest.h"
#include "fm/moments.hpp"
#include "fm/panel.hpp"
#include "fm/static_fm.hpp"
#include "support.hpp"

using namespace fm;

namespace {

Eigen::MatrixXd eight_factor_panel(int n, int T, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int r = 8;
  Eigen::MatrixXd loadings(n, r);
  for (int j = 0; j < r; ++j) {
    const double scale = std::sqrt(std::pow(0.76, j));  // decaying strength
    for (int i = 0; i < n; ++i) loadings(i, j) = scale * normal(eng);
  }
  Eigen::MatrixXd factors(r, T);
  for (int j = 0; j < r; ++j)
    for (int t = 0; t < T; ++t) factors(j, t) = normal(eng);
  Eigen::MatrixXd noise(n, T);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t) noise(i, t) = normal(eng);
  return loadings * factors + noise;
}

}  // namespace

TEST_CASE("monthly-macro scale pipeline: ingest, trajectories, selection") {
  const int n = 126, T = 780;
  Eigen::MatrixXd data = eight_factor_panel(n, T, 2024);

  // write a vintage-style CSV: header, transform row (all levels), data rows
  testsup::TempDir dir;
  const auto csv_path = dir.path() / "vintage.csv";
  {
    std::ofstream out(csv_path);
    out << "date";
    for (int i = 1; i <= n; ++i) out << ",s" << i;
    out << "\nTransform:";
    for (int i = 0; i < n; ++i) out << ",1";
    out << '\n';
    for (int t = 0; t < T; ++t) {
      out << "m" << t + 1;
      for (int i = 0; i < n; ++i) out << ',' << data(i, t);
      out << '\n';
    }
  }

  Panel panel = ingest_csv(csv_path, std::nullopt, true);
  REQUIRE(panel.n() == n);
  REQUIRE(panel.T() == T);

  auto perms = random_permutations(n, 100, 11);
  EigenTrajectory traj = eigenvalue_trajectory(panel, perms, 8,
                                               default_size_grid(n));
  double prev_slope = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 4; ++j) {
    const LinearFit fit = linear_growth_fit(traj, j);
    CHECK(fit.r2 >= 0.95);
    CHECK(fit.slope < prev_slope);  // decreasing slopes across j
    prev_slope = fit.slope;
  }

  CHECK(select_r_ic(panel, 15) == 8);
}
