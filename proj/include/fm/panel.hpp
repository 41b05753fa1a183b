#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fm {

// n x T observation panel, rows are cross-sectional series.  Immutable by
// convention after construction; every operation returns a new Panel.
struct Panel {
  Eigen::MatrixXd data;
  std::vector<std::string> series_ids;
  std::vector<std::string> time_index;
  bool standardized = false;
  bool unit_variance = false;

  int n() const { return static_cast<int>(data.rows()); }
  int T() const { return static_cast<int>(data.cols()); }

  // Validates n >= 1, T >= 2, all entries finite; fills default labels.
  static Panel from_data(Eigen::MatrixXd data,
                         std::vector<std::string> series_ids = {},
                         std::vector<std::string> time_index = {});
};

struct Permutation {
  std::vector<int> map;  // output row i takes input row map[i]

  int size() const { return static_cast<int>(map.size()); }
  bool is_valid() const;
  Permutation inverse() const;
  static Permutation identity(int n);
};

// Applies `first`, then `second`: permute(permute(p, first), second)
// equals permute(p, chain(first, second)).
Permutation chain(const Permutation& first, const Permutation& second);

Panel permute(const Panel& p, const Permutation& perm);

// Demeans every row; divides by the sample standard deviation when
// unit_variance is set.  Rejects zero-variance rows.
Panel standardize(const Panel& p, bool unit_variance = true);

// R uniform draws from a Fisher-Yates shuffle of {0,...,n-1}; deterministic
// in the seed.
std::vector<Permutation> random_permutations(int n, int R, std::uint64_t seed);

// Permutations obtained by sorting content-derived pseudo-random keys: the
// resulting row ordering depends only on the series values, not on their
// position in the input.  Relabeling the input rows therefore yields the
// same sequence of sub-panels, which makes permutation-averaged selection
// criteria exactly invariant under relabeling.
std::vector<Permutation> content_keyed_permutations(const Panel& p, int R,
                                                    std::uint64_t seed);

// FRED-MD style stationarity transforms:
//   1 level, 2 delta, 3 delta^2, 4 log, 5 delta log, 6 delta^2 log,
//   7 delta of (x_t/x_{t-1} - 1).
// Leading rows lost to differencing are dropped uniformly so the panel stays
// balanced; every series is then demeaned (and scaled when unit_variance).
// A second header row starting with "Transform:" (FRED-MD vintage layout) is
// picked up automatically when no tcodes are supplied.
Panel ingest_csv(const std::filesystem::path& path,
                 const std::optional<std::vector<int>>& tcodes = std::nullopt,
                 bool unit_variance = true);

// tcodes sidecar: rows of (series_id, tcode).
std::vector<int> read_tcodes_csv(const std::filesystem::path& path,
                                 const std::vector<std::string>& series_ids);

void write_panel_csv(const Panel& p, const std::filesystem::path& path);
Panel read_panel_csv(const std::filesystem::path& path);

}  // namespace fm
