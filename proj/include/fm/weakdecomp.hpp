#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fm/gdfm.hpp"
#include "fm/panel.hpp"

#include "json.hpp"

namespace fm {

// X = stat_common + weak_common + dyn_idio on the dynamic valid range.  The
// weakly common part is the subtraction-defined difference between the
// dynamically and statically common components; finite-sample leakage is
// reported, not suppressed.
struct ThreeTermDecomposition {
  int r = 0;
  int q = 0;
  int M = 0;
  int t_begin = 0;
  Eigen::MatrixXd stat_common;
  Eigen::MatrixXd weak_common;
  Eigen::MatrixXd dyn_idio;

  int valid_length() const { return static_cast<int>(stat_common.cols()); }
};

ThreeTermDecomposition three_term(const Panel& p, int r, int q, int M);

// Maximal absolute cross-correlation between component pairs over lags
// 0..max_lag in both directions, maximized over series pairs.  The variant
// flags follow the taxonomy of orthogonality between statically common and
// idiosyncratic components: contemporaneous-only versus all leads and lags.
struct OrthogonalityReport {
  struct Entry {
    std::string a, b;
    double max_abs_corr = 0.0;
    int at_lag = 0;               // lag of b relative to a
    double lag0_abs_corr = 0.0;
  };
  int max_lag = 0;
  double threshold = 0.1;
  std::vector<Entry> entries;
  bool contemporaneous_orthogonality = false;  // variant (A)
  bool all_leads_lags_orthogonality = false;   // variant (B)
};

OrthogonalityReport orthogonality_report(const ThreeTermDecomposition& d,
                                         int max_lag);

nlohmann::json to_json(const OrthogonalityReport& r);

// max over series pairs (i, j) and lags l in [-max_lag, max_lag] of the
// absolute sample cross-correlation corr(a_{i,t}, b_{j,t+l}).  Also reports
// the maximizing lag and the lag-0 maximum.
OrthogonalityReport::Entry max_cross_correlation(const Eigen::MatrixXd& a,
                                                 const Eigen::MatrixXd& b,
                                                 int max_lag, const std::string& name_a,
                                                 const std::string& name_b);

}  // namespace fm
