#include "fm/weakdecomp.hpp"

#include <cmath>
#include <stdexcept>

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::MatrixXd center_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd x = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) x.row(i).array() -= m.row(i).mean();
  return x;
}

}  // namespace

ThreeTermDecomposition three_term(const Panel& p, int r, int q, int M) {
  const StaticDecomposition sd = static_decompose(p, r);
  const DynamicDecomposition dd = gdfm_decompose(p, q, M);
  ThreeTermDecomposition out;
  out.r = r;
  out.q = q;
  out.M = M;
  out.t_begin = dd.t_begin;
  const int len = dd.valid_length();
  out.stat_common = sd.common.middleCols(dd.t_begin, len);
  out.weak_common = dd.common - out.stat_common;
  out.dyn_idio = dd.idio;
  return out;
}

OrthogonalityReport::Entry max_cross_correlation(const Eigen::MatrixXd& a,
                                                 const Eigen::MatrixXd& b,
                                                 int max_lag, const std::string& name_a,
                                                 const std::string& name_b) {
  const int T = static_cast<int>(a.cols());
  require(b.cols() == T, "cross-correlation: length mismatch");
  require(max_lag >= 0 && max_lag < T, "cross-correlation: bad max_lag");
  const Eigen::MatrixXd ac = center_rows(a);
  const Eigen::MatrixXd bc = center_rows(b);
  const Eigen::VectorXd sa =
      (ac.rowwise().squaredNorm() / static_cast<double>(T)).cwiseSqrt();
  const Eigen::VectorXd sb =
      (bc.rowwise().squaredNorm() / static_cast<double>(T)).cwiseSqrt();

  OrthogonalityReport::Entry e;
  e.a = name_a;
  e.b = name_b;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    // cov(a_{i,t}, b_{j,t+lag}) for every pair via one product
    const int len = T - std::abs(lag);
    Eigen::MatrixXd cov;
    if (lag >= 0)
      cov = ac.leftCols(len) * bc.rightCols(len).transpose() / static_cast<double>(T);
    else
      cov = ac.rightCols(len) * bc.leftCols(len).transpose() / static_cast<double>(T);
    double best = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      for (Eigen::Index j = 0; j < cov.cols(); ++j) {
        const double denom = sa(i) * sb(j);
        const double c = denom > 0.0 ? std::abs(cov(i, j)) / denom : 0.0;
        if (c > best) best = c;
      }
    }
    if (lag == 0) e.lag0_abs_corr = best;
    if (best > e.max_abs_corr) {
      e.max_abs_corr = best;
      e.at_lag = lag;
    }
  }
  return e;
}

OrthogonalityReport orthogonality_report(const ThreeTermDecomposition& d,
                                         int max_lag) {
  require(max_lag <= d.valid_length() / 4,
          "orthogonality_report: max_lag exceeds valid range / 4");
  OrthogonalityReport rep;
  rep.max_lag = max_lag;
  const Eigen::MatrixXd stat_idio = d.weak_common + d.dyn_idio;
  rep.entries.push_back(max_cross_correlation(d.stat_common, stat_idio, max_lag,
                                              "stat_common", "stat_idio"));
  rep.entries.push_back(max_cross_correlation(d.stat_common, d.weak_common, max_lag,
                                              "stat_common", "weak_common"));
  rep.entries.push_back(max_cross_correlation(d.weak_common, d.dyn_idio, max_lag,
                                              "weak_common", "dyn_idio"));
  rep.entries.push_back(max_cross_correlation(d.stat_common, d.dyn_idio, max_lag,
                                              "stat_common", "dyn_idio"));
  rep.contemporaneous_orthogonality = rep.entries[0].lag0_abs_corr <= rep.threshold;
  rep.all_leads_lags_orthogonality = rep.entries[0].max_abs_corr <= rep.threshold;
  return rep;
}

nlohmann::json to_json(const OrthogonalityReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"a", e.a},
                       {"b", e.b},
                       {"max_abs_corr", e.max_abs_corr},
                       {"at_lag", e.at_lag},
                       {"lag0_abs_corr", e.lag0_abs_corr}});
  }
  return {{"max_lag", r.max_lag},
          {"threshold", r.threshold},
          {"pairs", entries},
          {"contemporaneous_orthogonality", r.contemporaneous_orthogonality},
          {"all_leads_lags_orthogonality", r.all_leads_lags_orthogonality}};
}

}  // namespace fm
