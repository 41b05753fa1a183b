#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "fm/panel.hpp"
#include "fm/sim.hpp"

#include "json.hpp"

namespace fm {

struct ForecastOptions {
  int p_lags = 4;
  // 0 selects the factor count from the common panel's covariance spectrum
  // (smallest count capturing all but 1e-6 of the variance, capped at 8).
  int n_factors = 0;
  bool augment_idio_with_common = false;  // add factor lags to the idio design
};

// Direct h-step projections at a single origin: the common forecast regresses
// chi_{i,t+h} on current and lagged principal components of the common panel,
// the idio forecast regresses xi_{i,t+h} on its own lags (componentwise).
// Only data up to the origin enters either fit.
struct ComponentForecast {
  double common_pred = 0.0;
  double idio_pred = 0.0;
  double prediction() const { return common_pred + idio_pred; }
  Eigen::VectorXd common_coef;
  Eigen::VectorXd idio_coef;     // intercept first, then own lags
  Eigen::VectorXd idio_coef_se;
  int n_factors_used = 0;
  bool ridge_flagged = false;
};

ComponentForecast forecast_components(const Eigen::MatrixXd& common,
                                      const Eigen::MatrixXd& idio, int target,
                                      int h, int origin,
                                      const ForecastOptions& opts = {});

enum class ForecastMode { stat, dyn, oracle_stat, oracle_dyn };

std::string mode_name(ForecastMode m);
ForecastMode mode_from_name(const std::string& s);

struct ForecastSet {
  ForecastMode mode = ForecastMode::stat;
  int target = 0;
  int horizon = 1;
  std::vector<int> origins;   // global forecast-origin time indices
  Eigen::VectorXd prediction; // common_pred + idio_pred, exactly
  Eigen::VectorXd common_pred;
  Eigen::VectorXd idio_pred;
  Eigen::VectorXd realized;
  Eigen::VectorXd sq_error;
  bool any_ridge = false;

  double mse() const { return sq_error.size() ? sq_error.mean() : 0.0; }
};

// Rolling out-of-sample evaluation.  Estimated modes re-run the decomposition
// on every training window; oracle modes take the simulated true components
// (truth required).  For the estimated dynamic mode the forecast origin sits
// M observations before the window end, where the two-sided filter is still
// defined.
ForecastSet rolling_eval(const Panel& p, ForecastMode mode, const SimOutput* truth,
                         int target, int h, int window, int r_or_q, int M,
                         const ForecastOptions& opts = {}, int stride = 1);

void write_forecast_csv(const ForecastSet& f, const std::filesystem::path& path);
nlohmann::json forecast_summary(const std::vector<ForecastSet>& sets);

}  // namespace fm
