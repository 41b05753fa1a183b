#include "fm/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "fm/csv.hpp"
#include "fm/rng.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double row_mean(const Eigen::VectorXd& v) { return v.mean(); }

double row_var(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size());
}

bool near_constant(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return row_var(v) <= 1e-13 * (1.0 + m * m);
}

}  // namespace

Panel Panel::from_data(Eigen::MatrixXd data, std::vector<std::string> series_ids,
                       std::vector<std::string> time_index) {
  require(data.rows() >= 1, "panel needs at least one series");
  require(data.cols() >= 2, "panel needs at least two time points");
  require(data.allFinite(), "panel contains NaN or Inf entries");
  Panel p;
  p.data = std::move(data);
  if (series_ids.empty()) {
    for (int i = 0; i < p.data.rows(); ++i) series_ids.push_back("s" + std::to_string(i + 1));
  }
  if (time_index.empty()) {
    for (int t = 0; t < p.data.cols(); ++t) time_index.push_back("t" + std::to_string(t + 1));
  }
  require(static_cast<int>(series_ids.size()) == p.data.rows(), "series_ids length mismatch");
  require(static_cast<int>(time_index.size()) == p.data.cols(), "time_index length mismatch");
  p.series_ids = std::move(series_ids);
  p.time_index = std::move(time_index);
  return p;
}

bool Permutation::is_valid() const {
  std::vector<char> seen(map.size(), 0);
  for (int v : map) {
    if (v < 0 || v >= static_cast<int>(map.size()) || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.map.resize(map.size());
  for (int i = 0; i < static_cast<int>(map.size()); ++i) inv.map[map[i]] = i;
  return inv;
}

Permutation Permutation::identity(int n) {
  Permutation p;
  p.map.resize(n);
  std::iota(p.map.begin(), p.map.end(), 0);
  return p;
}

Permutation chain(const Permutation& first, const Permutation& second) {
  require(first.size() == second.size(), "permutation size mismatch");
  Permutation out;
  out.map.resize(first.size());
  for (int i = 0; i < first.size(); ++i) out.map[i] = first.map[second.map[i]];
  return out;
}

Panel permute(const Panel& p, const Permutation& perm) {
  require(perm.size() == p.n(), "permutation length does not match panel");
  require(perm.is_valid(), "permutation is not a bijection");
  Panel out = p;
  for (int i = 0; i < p.n(); ++i) {
    out.data.row(i) = p.data.row(perm.map[i]);
    out.series_ids[i] = p.series_ids[perm.map[i]];
  }
  return out;
}

Panel standardize(const Panel& p, bool unit_variance) {
  Panel out = p;
  for (int i = 0; i < p.n(); ++i) {
    const double m = row_mean(p.data.row(i));
    out.data.row(i).array() -= m;
    if (unit_variance) {
      const double sd = std::sqrt(row_var(p.data.row(i)));
      require(sd > 0.0, "zero-variance series: " + p.series_ids[i]);
      out.data.row(i) /= sd;
    }
  }
  out.standardized = true;
  out.unit_variance = unit_variance;
  return out;
}

std::vector<Permutation> random_permutations(int n, int R, std::uint64_t seed) {
  require(n >= 1, "random_permutations: n must be >= 1");
  require(R >= 1, "random_permutations: R must be >= 1");
  std::vector<Permutation> out(R);
  for (int r = 0; r < R; ++r) {
    auto eng = rng::engine(rng::derive(seed, rng::kPermutations, static_cast<std::uint64_t>(r)));
    Permutation p = Permutation::identity(n);
    for (int i = n - 1; i > 0; --i) {
      // bounded draw by rejection, avoids implementation-defined distributions
      const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
      const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
      std::uint64_t draw;
      do {
        draw = eng();
      } while (draw >= limit);
      std::swap(p.map[i], p.map[draw % bound]);
    }
    out[r] = std::move(p);
  }
  return out;
}

std::vector<Permutation> content_keyed_permutations(const Panel& p, int R,
                                                    std::uint64_t seed) {
  require(R >= 1, "content_keyed_permutations: R must be >= 1");
  const int n = p.n();
  std::vector<Permutation> out(R);
  std::vector<Eigen::VectorXd> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = p.data.row(i);
  for (int r = 0; r < R; ++r) {
    const std::uint64_t draw_seed =
        rng::derive(seed, rng::kPermutations, 0x10000ULL + static_cast<std::uint64_t>(r));
    std::vector<std::pair<std::uint64_t, int>> keyed(n);
    for (int i = 0; i < n; ++i) {
      keyed[i] = {rng::content_key(draw_seed, rows[i].data(),
                                   static_cast<std::size_t>(rows[i].size())),
                  i};
    }
    std::sort(keyed.begin(), keyed.end());
    Permutation perm;
    perm.map.resize(n);
    for (int i = 0; i < n; ++i) perm.map[i] = keyed[i].second;
    out[r] = std::move(perm);
  }
  return out;
}

namespace {

// Applies one transform code; result is shorter by the number of lost rows.
Eigen::VectorXd apply_tcode(const Eigen::VectorXd& x, int code, const std::string& id) {
  const int T = static_cast<int>(x.size());
  auto logged = [&]() {
    require((x.array() > 0.0).all(), "log transform on non-positive values in series " + id);
    return x.array().log().matrix().eval();
  };
  switch (code) {
    case 1:
      return x;
    case 2:
      return (x.tail(T - 1) - x.head(T - 1)).eval();
    case 3: {
      Eigen::VectorXd d = x.tail(T - 1) - x.head(T - 1);
      return (d.tail(T - 2) - d.head(T - 2)).eval();
    }
    case 4:
      return logged();
    case 5: {
      Eigen::VectorXd l = logged();
      return (l.tail(T - 1) - l.head(T - 1)).eval();
    }
    case 6: {
      Eigen::VectorXd l = logged();
      Eigen::VectorXd d = l.tail(T - 1) - l.head(T - 1);
      return (d.tail(T - 2) - d.head(T - 2)).eval();
    }
    case 7: {
      Eigen::VectorXd g(T - 1);
      for (int t = 1; t < T; ++t) {
        require(x(t - 1) != 0.0, "division by zero in tcode 7 for series " + id);
        g(t - 1) = x(t) / x(t - 1) - 1.0;
      }
      return (g.tail(T - 2) - g.head(T - 2)).eval();
    }
    default:
      throw std::invalid_argument("unknown transform code " + std::to_string(code) +
                                  " for series " + id);
  }
}

int rows_lost(int code) {
  switch (code) {
    case 1:
    case 4:
      return 0;
    case 2:
    case 5:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

std::vector<int> read_tcodes_csv(const std::filesystem::path& path,
                                 const std::vector<std::string>& series_ids) {
  csv::Table t = csv::read(path);
  std::map<std::string, int> by_id;
  auto add_row = [&](const std::vector<std::string>& row) {
    require(row.size() >= 2, "tcodes row needs (series_id, tcode)");
    by_id[row[0]] = static_cast<int>(csv::parse_double(row[1], "tcodes file"));
  };
  // header may itself be a data row (no fixed header required)
  if (t.header.size() >= 2) {
    try {
      add_row(t.header);
    } catch (const std::exception&) {
    }
  }
  for (const auto& row : t.rows) add_row(row);
  std::vector<int> out;
  for (const auto& id : series_ids) {
    auto it = by_id.find(id);
    require(it != by_id.end(), "tcodes file has no entry for series " + id);
    out.push_back(it->second);
  }
  return out;
}

Panel ingest_csv(const std::filesystem::path& path,
                 const std::optional<std::vector<int>>& tcodes, bool unit_variance) {
  csv::Table t = csv::read(path);
  require(t.header.size() >= 2, "CSV needs a time column and at least one series");
  const int n = static_cast<int>(t.header.size()) - 1;
  std::vector<std::string> ids(t.header.begin() + 1, t.header.end());

  std::vector<int> codes;
  std::size_t first_row = 0;
  if (tcodes) {
    codes = *tcodes;
    require(static_cast<int>(codes.size()) == n,
            "tcodes length does not match series count");
  } else if (!t.rows.empty() && !t.rows[0].empty() &&
             t.rows[0][0].rfind("Transform", 0) == 0) {
    require(static_cast<int>(t.rows[0].size()) == n + 1, "ragged transform row");
    for (int j = 0; j < n; ++j)
      codes.push_back(static_cast<int>(csv::parse_double(t.rows[0][j + 1], "transform row")));
    first_row = 1;
  } else {
    codes.assign(n, 1);
  }
  for (int c : codes)
    require(c >= 1 && c <= 7, "transform code out of range: " + std::to_string(c));

  const int T_raw = static_cast<int>(t.rows.size() - first_row);
  require(T_raw >= 2, "panel needs at least two time points");
  Eigen::MatrixXd raw(n, T_raw);
  std::vector<std::string> times(T_raw);
  for (int r = 0; r < T_raw; ++r) {
    const auto& row = t.rows[first_row + r];
    require(static_cast<int>(row.size()) == n + 1,
            "ragged CSV row " + std::to_string(r + 2));
    times[r] = row[0];
    for (int j = 0; j < n; ++j) {
      raw(j, r) = csv::parse_double(row[j + 1], "series " + ids[j] + ", row " +
                                                    std::to_string(r + 2));
    }
  }

  int drop = 0;
  for (int c : codes) drop = std::max(drop, rows_lost(c));
  const int T = T_raw - drop;
  require(T >= 2, "too few observations left after differencing");

  Eigen::MatrixXd out(n, T);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd y = apply_tcode(raw.row(j), codes[j], ids[j]);
    require(y.allFinite(), "transform produced non-finite values in series " + ids[j]);
    out.row(j) = y.tail(T);
    require(!near_constant(out.row(j)), "zero-variance series after transform: " + ids[j]);
  }

  Panel p = Panel::from_data(std::move(out), std::move(ids),
                             std::vector<std::string>(times.end() - T, times.end()));
  return standardize(p, unit_variance);
}

void write_panel_csv(const Panel& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write panel CSV: " + path.string());
  out << "time";
  for (const auto& id : p.series_ids) out << ',' << id;
  out << '\n';
  for (int t = 0; t < p.T(); ++t) {
    out << p.time_index[t];
    for (int i = 0; i < p.n(); ++i) out << ',' << csv::format_double(p.data(i, t));
    out << '\n';
  }
}

Panel read_panel_csv(const std::filesystem::path& path) {
  csv::Table t = csv::read(path);
  if (t.header.size() < 2) throw std::runtime_error("CSV needs a time column and data");
  const int n = static_cast<int>(t.header.size()) - 1;
  const int T = static_cast<int>(t.rows.size());
  Eigen::MatrixXd data(n, T);
  std::vector<std::string> ids(t.header.begin() + 1, t.header.end());
  std::vector<std::string> times(T);
  for (int r = 0; r < T; ++r) {
    const auto& row = t.rows[r];
    require(static_cast<int>(row.size()) == n + 1,
            "ragged CSV row " + std::to_string(r + 2));
    times[r] = row[0];
    for (int j = 0; j < n; ++j)
      data(j, r) = csv::parse_double(row[j + 1], "row " + std::to_string(r + 2));
  }
  return Panel::from_data(std::move(data), std::move(ids), std::move(times));
}

}  // namespace fm
