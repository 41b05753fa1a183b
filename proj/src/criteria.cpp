#include "fm/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fm/csv.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct Interval {
  int begin;  // inclusive c indices
  int end;
};

}  // namespace

ICSurface tune_penalized_count(const Eigen::MatrixXd& avg_eigs,
                               const Eigen::VectorXd& avg_level,
                               const std::vector<int>& m_grid,
                               const Eigen::VectorXd& c_grid, int k_max,
                               const std::function<double(int)>& penalty) {
  const int n_m = static_cast<int>(m_grid.size());
  const int n_c = static_cast<int>(c_grid.size());
  require(n_m >= 1 && n_c >= 1, "tuned criterion: empty grid");
  require(avg_eigs.cols() == n_m, "tuned criterion: eigenvalue columns != |m_grid|");
  require(k_max >= 1 && k_max <= avg_eigs.rows(),
          "tuned criterion: k_max out of range");
  require(k_max <= *std::min_element(m_grid.begin(), m_grid.end()),
          "tuned criterion: k_max exceeds smallest sub-panel size");

  ICSurface s;
  s.m_grid = m_grid;
  s.c_grid = c_grid;
  s.values.assign(n_m, Eigen::MatrixXd::Zero(k_max + 1, n_c));
  s.selected.resize(n_m, n_c);

  for (int mi = 0; mi < n_m; ++mi) {
    const int m = m_grid[mi];
    const double level = avg_level(mi);
    require(level > 0.0, "tuned criterion: non-positive trace level");
    const double p = penalty(m);
    // cumulative normalized shares of the top eigenvalues
    Eigen::VectorXd share = Eigen::VectorXd::Zero(k_max + 1);
    for (int k = 1; k <= k_max; ++k)
      share(k) = share(k - 1) + avg_eigs(k - 1, mi) / (level * m);
    for (int ci = 0; ci < n_c; ++ci) {
      const double c = c_grid(ci);
      int best_k = 0;
      double best = 1.0;  // k = 0
      for (int k = 0; k <= k_max; ++k) {
        const double ic = 1.0 - share(k) + k * c * p;
        s.values[mi](k, ci) = ic;
        if (ic < best) {
          best = ic;
          best_k = k;
        }
      }
      s.selected(mi, ci) = best_k;
    }
  }

  s.stability.resize(n_c);
  for (int ci = 0; ci < n_c; ++ci) {
    const Eigen::VectorXd col = s.selected.col(ci).cast<double>();
    const double mean = col.mean();
    s.stability(ci) = std::sqrt((col.array() - mean).square().mean());
  }

  // maximal stability intervals, in increasing c: runs where the selection
  // is constant across m (zero stability) and across c (same count)
  std::vector<Interval> intervals;
  for (int ci = 0; ci < n_c;) {
    if (s.stability(ci) == 0.0) {
      int end = ci;
      while (end + 1 < n_c && s.stability(end + 1) == 0.0 &&
             s.selected(n_m - 1, end + 1) == s.selected(n_m - 1, ci))
        ++end;
      intervals.push_back({ci, end});
      ci = end + 1;
    } else {
      ++ci;
    }
  }

  auto finish = [&](int ci) {
    s.c_star = c_grid(ci);
    s.chosen = s.selected(n_m - 1, ci);
  };

  // Skip the leading stability interval(s) where the selection sits at
  // k_max: that is the under-penalized zone (with the default grid the
  // smallest c is under-penalizing, so this is the first interval).  The
  // next interval in increasing c is the one the tuning targets; one- or
  // two-point runs are transitional coincidences, not stability zones, so a
  // candidate must span at least three grid points.
  std::size_t first_candidate = 0;
  while (first_candidate < intervals.size()) {
    const int mid = (intervals[first_candidate].begin +
                     intervals[first_candidate].end) / 2;
    if (s.selected(n_m - 1, mid) == k_max) ++first_candidate;
    else break;
  }
  int pick = -1;
  for (std::size_t i = first_candidate; i < intervals.size(); ++i) {
    if (intervals[i].end - intervals[i].begin >= 2) {
      pick = static_cast<int>(i);
      break;
    }
  }
  if (pick < 0) {  // no wide interval: take the longest remaining candidate
    int best_len = -1;
    for (std::size_t i = first_candidate; i < intervals.size(); ++i) {
      const int len = intervals[i].end - intervals[i].begin;
      if (len > best_len) {
        best_len = len;
        pick = static_cast<int>(i);
      }
    }
  }
  if (pick < 0) {
    // no stability interval beyond the under-penalized one
    s.degraded = true;
    int arg = 0;
    s.stability.minCoeff(&arg);
    finish(arg);
    return s;
  }
  finish((intervals[pick].begin + intervals[pick].end) / 2);
  return s;
}

Eigen::VectorXd default_c_grid() {
  Eigen::VectorXd c(101);
  for (int i = 0; i < 101; ++i) c(i) = 0.01 + (3.0 - 0.01) * i / 100.0;
  return c;
}

std::vector<int> default_m_grid(int n) {
  std::vector<int> grid;
  const int lo = std::max(1, n / 2);
  for (int i = 0; i < 10; ++i) {
    int m = lo + static_cast<int>(std::lround((n - lo) * i / 9.0));
    if (grid.empty() || m > grid.back()) grid.push_back(m);
  }
  if (grid.back() != n) grid.push_back(n);
  return grid;
}

double static_penalty(int m, int T) {
  const double md = m, Td = T;
  return (md + Td) / (md * Td) * std::log(std::min(md, Td));
}

double dynamic_penalty(int m, int T, int M) {
  const double md = m, Td = T, Md = M;
  const double rate = 1.0 / (Md * Md) + std::sqrt(Md / Td) + 1.0 / md;
  const double cap = std::min({md, Md * Md, std::sqrt(Td / Md)});
  return rate * std::log(cap);
}

void write_ic_surface_csv(const ICSurface& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write IC surface CSV: " + path);
  out << "m,k,c,value,selected\n";
  for (std::size_t mi = 0; mi < s.m_grid.size(); ++mi) {
    for (int ci = 0; ci < s.c_grid.size(); ++ci) {
      for (int k = 0; k < s.values[mi].rows(); ++k) {
        out << s.m_grid[mi] << ',' << k << ',' << csv::format_double(s.c_grid(ci))
            << ',' << csv::format_double(s.values[mi](k, ci)) << ','
            << s.selected(static_cast<Eigen::Index>(mi), ci) << '\n';
      }
    }
  }
}

}  // namespace fm
