// Benchmark of the sub-panel eigenvalue sweep kernels: serial from-scratch
// reference vs the block-extraction kernel at 1 thread and at the full
// thread count.  Also cross-checks that the implementations agree.
//
// Usage: fmtk-bench [--quick]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "fm/kernels.hpp"
#include "fm/moments.hpp"
#include "fm/parallel.hpp"
#include "fm/sim.hpp"
#include "fm/spectra.hpp"

using namespace fm;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_diff(const SweepResult& a, const SweepResult& b) {
  double worst = 0.0;
  for (std::size_t p = 0; p < a.values.size(); ++p)
    worst = std::max(worst, (a.values[p] - b.values[p]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const int n = quick ? 60 : 180;
  const int T = quick ? 200 : 600;
  const int R = quick ? 4 : 24;
  const int M = quick ? 6 : 12;

  SimOutput out = gen_rand_two_factor(n, T, 7);
  auto perms = random_permutations(n, R, 11);
  std::vector<int> grid;
  for (int m = n / 6; m <= n; m += n / 6) grid.push_back(m);
  const int j_max = 4;

  std::printf("sub-panel eigenvalue sweep benchmark: n=%d T=%d perms=%d |grid|=%zu\n",
              n, T, R, grid.size());
  std::printf("%-34s %10s %9s\n", "kernel", "time [s]", "speedup");

  const Eigen::MatrixXd gamma0 = autocovariances(out.panel, 0).gamma(0);
  SweepResult ref_static, fast_static;
  const double t_ref = seconds(
      [&] { ref_static = ref::static_eigen_sweep(out.panel, perms, grid, j_max); });
  std::printf("%-34s %10.3f %9s\n", "static: serial reference", t_ref, "1.0x");

  set_max_threads(1);
  double t1 = seconds(
      [&] { fast_static = static_eigen_sweep(gamma0, perms, grid, j_max); });
  std::printf("%-34s %10.3f %8.1fx\n", "static: block kernel, 1 thread", t1,
              t_ref / t1);

  set_max_threads(0);
  double tn = seconds(
      [&] { fast_static = static_eigen_sweep(gamma0, perms, grid, j_max); });
  std::printf("%-34s %10.3f %8.1fx  (%d threads)\n", "static: block kernel, OpenMP",
              tn, t_ref / tn, max_threads());
  std::printf("  max |static diff| = %.2e\n", max_diff(ref_static, fast_static));

  const CovarianceSet cs = autocovariances(out.panel, M);
  SweepResult ref_dyn, fast_dyn;
  const double td_ref = seconds(
      [&] { ref_dyn = ref::dynamic_eigen_sweep(out.panel, M, perms, grid, j_max); });
  std::printf("%-34s %10.3f %9s\n", "dynamic: serial reference", td_ref, "1.0x");

  set_max_threads(1);
  double td1 = seconds(
      [&] { fast_dyn = dynamic_eigen_sweep(cs.gammas, M, perms, grid, j_max); });
  std::printf("%-34s %10.3f %8.1fx\n", "dynamic: block kernel, 1 thread", td1,
              td_ref / td1);

  set_max_threads(0);
  double tdn = seconds(
      [&] { fast_dyn = dynamic_eigen_sweep(cs.gammas, M, perms, grid, j_max); });
  std::printf("%-34s %10.3f %8.1fx  (%d threads)\n", "dynamic: block kernel, OpenMP",
              tdn, td_ref / tdn, max_threads());
  std::printf("  max |dynamic diff| = %.2e\n", max_diff(ref_dyn, fast_dyn));

  const bool ok = max_diff(ref_dyn, fast_dyn) < 1e-8 &&
                  max_diff(ref_static, fast_static) < 1e-9;
  std::printf("agreement: %s\n", ok ? "OK" : "MISMATCH");
  return ok ? 0 : 1;
}
