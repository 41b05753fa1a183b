#include "fm/forecast.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fm/csv.hpp"
#include "fm/gdfm.hpp"
#include "fm/moments.hpp"
#include "fm/static_fm.hpp"

namespace fm {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct Fit {
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  bool ridge = false;
};

// OLS with a ridge fallback when the design is ill conditioned
// (condition estimate > 1e12): (X'X + 1e-6 tr(X'X) I) beta = X'y.
Fit ols_or_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Fit fit;
  const int cols = static_cast<int>(X.cols());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd diag = qr.matrixR().diagonal().cwiseAbs();
  const double dmax = diag.maxCoeff();
  const double dmin = diag.minCoeff();
  if (qr.rank() < cols || dmin <= 0.0 || dmax / dmin > 1e12) {
    const Eigen::MatrixXd gram = X.transpose() * X;
    const double lambda = 1e-6 * gram.trace();
    Eigen::MatrixXd reg = gram;
    reg.diagonal().array() += lambda;
    fit.coef = reg.ldlt().solve(X.transpose() * y);
    fit.ridge = true;
  } else {
    fit.coef = qr.solve(y);
  }
  const Eigen::VectorXd resid = y - X * fit.coef;
  const int dof = std::max<int>(1, static_cast<int>(X.rows()) - cols);
  const double s2 = resid.squaredNorm() / dof;
  fit.se.resize(cols);
  Eigen::MatrixXd gram = X.transpose() * X;
  if (fit.ridge) gram.diagonal().array() += 1e-6 * gram.trace();
  const Eigen::MatrixXd ginv =
      gram.ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
  for (int j = 0; j < cols; ++j)
    fit.se(j) = std::sqrt(std::max(0.0, s2 * ginv(j, j)));
  return fit;
}

// Principal-component scores of the common panel using data up to `origin`,
// with the factor count chosen from the covariance spectrum when requested.
Eigen::MatrixXd common_factors(const Eigen::MatrixXd& common, int origin,
                               int requested, int* used) {
  const int n = static_cast<int>(common.rows());
  const Eigen::MatrixXd train = common.leftCols(origin + 1);
  Eigen::MatrixXd x = train;
  for (int i = 0; i < n; ++i) x.row(i).array() -= train.row(i).mean();
  const Eigen::MatrixXd gamma = x * x.transpose() / static_cast<double>(x.cols());
  const double total = gamma.trace();
  if (total <= 0.0) {
    *used = 0;
    return Eigen::MatrixXd::Zero(0, common.cols());
  }
  const SymEigen eig = eigen_sym(gamma);
  int k = requested;
  if (k <= 0) {
    const int cap = std::min<int>(8, n);
    double cum = 0.0;
    k = cap;
    for (int j = 0; j < cap; ++j) {
      cum += eig.values(j);
      if (cum >= (1.0 - 1e-6) * total) {
        k = j + 1;
        break;
      }
    }
  }
  k = std::min(k, n);
  *used = k;
  Eigen::MatrixXd full = common;
  for (int i = 0; i < n; ++i) full.row(i).array() -= train.row(i).mean();
  return eig.vectors.leftCols(k).transpose() * full;  // k x T scores
}

}  // namespace

ComponentForecast forecast_components(const Eigen::MatrixXd& common,
                                      const Eigen::MatrixXd& idio, int target,
                                      int h, int origin, const ForecastOptions& opts) {
  const int T = static_cast<int>(common.cols());
  require(idio.cols() == T, "forecast: component panels disagree on T");
  require(target >= 0 && target < common.rows(), "forecast: target out of range");
  require(h >= 1, "forecast: horizon must be >= 1");
  require(opts.p_lags >= 1, "forecast: p_lags must be >= 1");
  require(origin >= 0 && origin < T, "forecast: origin out of range");
  const int p = opts.p_lags;
  const int first_s = p - 1;           // earliest usable regressor time
  const int last_s = origin - h;       // latest training row
  require(last_s - first_s + 1 >= 10 * p,
          "forecast: training window too short for the lag order");

  ComponentForecast out;
  Eigen::MatrixXd scores =
      common_factors(common, origin, opts.n_factors, &out.n_factors_used);
  const int k = out.n_factors_used;
  require(last_s - first_s + 1 >= 10 * (k * p + p),
          "forecast: training window too short for the factor count");

  {  // common component: chi_{target, s+h} ~ scores at s and lags
    const int rows = last_s - first_s + 1;
    const int cols = 1 + k * p;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      const int s = first_s + r;
      X(r, 0) = 1.0;
      for (int l = 0; l < p; ++l)
        for (int j = 0; j < k; ++j) X(r, 1 + l * k + j) = scores(j, s - l);
      y(r) = common(target, s + h);
    }
    Fit fit = ols_or_ridge(X, y);
    out.common_coef = fit.coef;
    out.ridge_flagged |= fit.ridge;
    Eigen::VectorXd xo(cols);
    xo(0) = 1.0;
    for (int l = 0; l < p; ++l)
      for (int j = 0; j < k; ++j) xo(1 + l * k + j) = scores(j, origin - l);
    out.common_pred = xo.dot(fit.coef);
  }

  {  // idio component: own lags, optionally augmented with the factor lags
    const int extra = opts.augment_idio_with_common ? k * p : 0;
    const int rows = last_s - first_s + 1;
    const int cols = 1 + p + extra;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      const int s = first_s + r;
      X(r, 0) = 1.0;
      for (int l = 0; l < p; ++l) X(r, 1 + l) = idio(target, s - l);
      for (int l = 0; l < p && extra > 0; ++l)
        for (int j = 0; j < k; ++j) X(r, 1 + p + l * k + j) = scores(j, s - l);
      y(r) = idio(target, s + h);
    }
    Fit fit = ols_or_ridge(X, y);
    out.idio_coef = fit.coef;
    out.idio_coef_se = fit.se;
    out.ridge_flagged |= fit.ridge;
    Eigen::VectorXd xo(cols);
    xo(0) = 1.0;
    for (int l = 0; l < p; ++l) xo(1 + l) = idio(target, origin - l);
    for (int l = 0; l < p && extra > 0; ++l)
      for (int j = 0; j < k; ++j) xo(1 + p + l * k + j) = scores(j, origin - l);
    out.idio_pred = xo.dot(fit.coef);
  }
  return out;
}

std::string mode_name(ForecastMode m) {
  switch (m) {
    case ForecastMode::stat: return "stat";
    case ForecastMode::dyn: return "dyn";
    case ForecastMode::oracle_stat: return "oracle_stat";
    case ForecastMode::oracle_dyn: return "oracle_dyn";
  }
  throw std::logic_error("unreachable");
}

ForecastMode mode_from_name(const std::string& s) {
  if (s == "stat") return ForecastMode::stat;
  if (s == "dyn") return ForecastMode::dyn;
  if (s == "oracle_stat") return ForecastMode::oracle_stat;
  if (s == "oracle_dyn") return ForecastMode::oracle_dyn;
  throw std::invalid_argument("unknown forecast mode: " + s);
}

ForecastSet rolling_eval(const Panel& p, ForecastMode mode, const SimOutput* truth,
                         int target, int h, int window, int r_or_q, int M,
                         const ForecastOptions& opts, int stride) {
  const int T = p.T();
  require(window + h <= T, "rolling_eval: window + h exceeds T");
  require(stride >= 1, "rolling_eval: stride must be >= 1");
  const bool oracle =
      mode == ForecastMode::oracle_stat || mode == ForecastMode::oracle_dyn;
  require(!oracle || truth != nullptr, "rolling_eval: oracle mode needs truth");
  if (mode == ForecastMode::dyn)
    require(window > 2 * M + 10 * opts.p_lags,
            "rolling_eval: window too short for two-sided filtering");

  // For the estimated dynamic mode the filtered components end M observations
  // before the window does, so the effective forecast origin sits at
  // window_end - M; origins record the information-set time.
  const int origin_shift = mode == ForecastMode::dyn ? M : 0;
  std::vector<int> origins;
  for (int t0 = window - 1; t0 + h < T; t0 += stride)
    origins.push_back(t0 - origin_shift);
  require(!origins.empty(), "rolling_eval: no feasible forecast origins");

  ForecastSet out;
  out.mode = mode;
  out.target = target;
  out.horizon = h;
  out.origins = origins;
  const int N = static_cast<int>(origins.size());
  out.prediction.resize(N);
  out.common_pred.resize(N);
  out.idio_pred.resize(N);
  out.realized.resize(N);
  out.sq_error.resize(N);
  std::vector<char> ridge(N, 0);

#pragma omp parallel for schedule(dynamic)
  for (int oi = 0; oi < N; ++oi) {
    const int t0 = origins[oi] + origin_shift;  // window end
    const int w_start = t0 - window + 1;
    ComponentForecast cf;
    int global_target_time = 0;
    switch (mode) {
      case ForecastMode::oracle_stat: {
        const Eigen::MatrixXd common =
            truth->true_stat_common.middleCols(w_start, window);
        const Eigen::MatrixXd idio =
            p.data.middleCols(w_start, window) - common;
        cf = forecast_components(common, idio, target, h, window - 1, opts);
        global_target_time = t0 + h;
        break;
      }
      case ForecastMode::oracle_dyn: {
        const Eigen::MatrixXd common = truth->true_common.middleCols(w_start, window);
        const Eigen::MatrixXd idio = truth->true_idio.middleCols(w_start, window);
        cf = forecast_components(common, idio, target, h, window - 1, opts);
        global_target_time = t0 + h;
        break;
      }
      case ForecastMode::stat: {
        Panel train = Panel::from_data(p.data.middleCols(w_start, window));
        const StaticDecomposition sd = static_decompose(train, r_or_q);
        cf = forecast_components(sd.common, sd.idio, target, h, window - 1, opts);
        global_target_time = t0 + h;
        break;
      }
      case ForecastMode::dyn: {
        Panel train = Panel::from_data(p.data.middleCols(w_start, window));
        const DynamicDecomposition dd = gdfm_decompose(train, r_or_q, M);
        // components live on [M, window-M); forecast from their last column
        cf = forecast_components(dd.common, dd.idio, target, h,
                                 dd.valid_length() - 1, opts);
        global_target_time = t0 - M + h;
        break;
      }
    }
    out.common_pred(oi) = cf.common_pred;
    out.idio_pred(oi) = cf.idio_pred;
    out.prediction(oi) = cf.prediction();
    out.realized(oi) = p.data(target, global_target_time);
    const double e = out.realized(oi) - out.prediction(oi);
    out.sq_error(oi) = e * e;
    ridge[oi] = cf.ridge_flagged ? 1 : 0;
  }
  for (char r : ridge) out.any_ridge |= (r != 0);
  return out;
}

void write_forecast_csv(const ForecastSet& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write forecast CSV: " + path.string());
  out << "origin,horizon,mode,prediction,realized,sq_error\n";
  for (std::size_t i = 0; i < f.origins.size(); ++i) {
    out << f.origins[i] + 1 << ',' << f.horizon << ',' << mode_name(f.mode) << ','
        << csv::format_double(f.prediction(static_cast<Eigen::Index>(i))) << ','
        << csv::format_double(f.realized(static_cast<Eigen::Index>(i))) << ','
        << csv::format_double(f.sq_error(static_cast<Eigen::Index>(i))) << '\n';
  }
}

nlohmann::json forecast_summary(const std::vector<ForecastSet>& sets) {
  nlohmann::json per_mode = nlohmann::json::object();
  for (const auto& s : sets) {
    per_mode[mode_name(s.mode)] = {{"mse", s.mse()},
                                   {"n_origins", s.origins.size()},
                                   {"horizon", s.horizon},
                                   {"target", s.target + 1},
                                   {"ridge_fallback_used", s.any_ridge}};
  }
  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& a : sets)
    for (const auto& b : sets)
      if (&a != &b && b.mse() > 0.0)
        ratios[mode_name(a.mode) + "_over_" + mode_name(b.mode)] = a.mse() / b.mse();
  return {{"per_mode", per_mode}, {"mse_ratios", ratios}};
}

}  // namespace fm
