#include "fm/kernels.hpp"

#include "doctest.h"
#include "fm/moments.hpp"
#include "fm/parallel.hpp"
#include "fm/sim.hpp"
#include "support.hpp"

using namespace fm;

// The optimized kernels extract permuted blocks of full-panel moments; the
// reference kernels recompute every sub-panel from the raw data.  Agreement
// between the two is the downdating-consistency property.

TEST_CASE("static sweep matches the serial reference") {
  SimOutput out = gen_rand_one_factor(45, 150, 3);
  auto perms = random_permutations(45, 4, 11);
  std::vector<int> grid = {5, 17, 30, 45};
  const Eigen::MatrixXd gamma0 = autocovariances(out.panel, 0).gamma(0);
  SweepResult fast = static_eigen_sweep(gamma0, perms, grid, 3);
  SweepResult slow = ref::static_eigen_sweep(out.panel, perms, grid, 3);
  REQUIRE(fast.values.size() == slow.values.size());
  for (std::size_t p = 0; p < fast.values.size(); ++p) {
    CHECK((fast.values[p] - slow.values[p]).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fast.traces[p] - slow.traces[p]).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("dynamic sweep matches the serial reference") {
  SimOutput out = gen_dynamic_loading(24, 200, 5, {1.0, 1.0});
  auto perms = random_permutations(24, 3, 13);
  std::vector<int> grid = {8, 16, 24};
  const int M = 8;
  const CovarianceSet cs = autocovariances(out.panel, M);
  SweepResult fast = dynamic_eigen_sweep(cs.gammas, M, perms, grid, 3);
  SweepResult slow = ref::dynamic_eigen_sweep(out.panel, M, perms, grid, 3);
  for (std::size_t p = 0; p < fast.values.size(); ++p) {
    CHECK((fast.values[p] - slow.values[p]).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((fast.traces[p] - slow.traces[p]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sweep results do not depend on the thread count") {
  SimOutput out = gen_rand_two_factor(36, 120, 9);
  auto perms = random_permutations(36, 5, 17);
  std::vector<int> grid = {6, 12, 24, 36};
  const Eigen::MatrixXd gamma0 = autocovariances(out.panel, 0).gamma(0);
  set_max_threads(1);
  SweepResult serial = static_eigen_sweep(gamma0, perms, grid, 4);
  set_max_threads(0);
  SweepResult parallel = static_eigen_sweep(gamma0, perms, grid, 4);
  for (std::size_t p = 0; p < serial.values.size(); ++p)
    CHECK((serial.values[p] - parallel.values[p]).cwiseAbs().maxCoeff() == 0.0);

  const CovarianceSet cs = autocovariances(out.panel, 6);
  set_max_threads(1);
  SweepResult dserial = dynamic_eigen_sweep(cs.gammas, 6, perms, grid, 2);
  set_max_threads(0);
  SweepResult dparallel = dynamic_eigen_sweep(cs.gammas, 6, perms, grid, 2);
  for (std::size_t p = 0; p < dserial.values.size(); ++p)
    CHECK((dserial.values[p] - dparallel.values[p]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sweep argument validation") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(5, 5);
  auto id = Permutation::identity(5);
  CHECK_THROWS(static_eigen_sweep(g, {}, {5}, 1));
  CHECK_THROWS(static_eigen_sweep(g, {id}, {}, 1));
  CHECK_THROWS(static_eigen_sweep(g, {id}, {3, 3}, 1));
  CHECK_THROWS(static_eigen_sweep(g, {id}, {6}, 1));
  CHECK_THROWS(static_eigen_sweep(g, {Permutation::identity(4)}, {4}, 1));
}

TEST_CASE("fixed-order averaging") {
  std::vector<Eigen::MatrixXd> vals = {Eigen::MatrixXd::Constant(2, 2, 1.0),
                                       Eigen::MatrixXd::Constant(2, 2, 3.0)};
  CHECK((average_sweep(vals) - Eigen::MatrixXd::Constant(2, 2, 2.0))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}
