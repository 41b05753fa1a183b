// fmtk: factor-model toolkit CLI.
//
// Subcommands: simulate, ingest, eigtraj, nfactors, decompose, forecast,
// rerun.  Every run writes its outputs plus a manifest.json capturing the
// command, resolved parameters, seed, and version; `fmtk rerun manifest.json
// --out DIR` replays the stored parameters and reproduces the outputs
// bit-identically.  Parameters may also be supplied as a JSON object via
// --config; explicit flags win over the config file.  FMTK_THREADS (or
// --threads) caps the OpenMP workers.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fm/criteria.hpp"
#include "fm/csv.hpp"
#include "fm/forecast.hpp"
#include "fm/gdfm.hpp"
#include "fm/moments.hpp"
#include "fm/panel.hpp"
#include "fm/parallel.hpp"
#include "fm/sim.hpp"
#include "fm/spectra.hpp"
#include "fm/static_fm.hpp"
#include "fm/version.hpp"
#include "fm/weakdecomp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Registers options on a CLI11 subcommand and resolves their final values
// with precedence: explicit flag > --config entry > default.
class ParamSet {
 public:
  explicit ParamSet(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_, "JSON file with parameter defaults");
    cmd->add_option("--threads", threads_, "cap on worker threads");
    cmd->add_option("--out", out_, "output directory")->required();
  }

  void add_int(const std::string& name, int def, const std::string& help) {
    ints_[name] = def;
    cmd_->add_option("--" + name, ints_[name], help);
  }
  void add_u64(const std::string& name, std::uint64_t def, const std::string& help) {
    u64s_[name] = def;
    cmd_->add_option("--" + name, u64s_[name], help);
  }
  void add_string(const std::string& name, const std::string& def,
                  const std::string& help) {
    strings_[name] = def;
    cmd_->add_option("--" + name, strings_[name], help);
  }
  void add_flag(const std::string& name, const std::string& help) {
    flags_[name] = false;
    cmd_->add_flag("--" + name, flags_[name], help);
  }

  // Final parameter object; config fills anything the command line left alone.
  json resolve() const {
    json p;
    for (const auto& [k, v] : ints_) p[k] = v;
    for (const auto& [k, v] : u64s_) p[k] = v;
    for (const auto& [k, v] : strings_) p[k] = v;
    for (const auto& [k, v] : flags_) p[k] = v;
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw std::runtime_error("cannot open config file: " + config_path_);
      json cfg = json::parse(in);
      for (auto& [k, v] : cfg.items()) {
        if (!p.contains(k)) throw std::runtime_error("unknown config key: " + k);
        if (cmd_->count("--" + k) == 0) p[k] = v;
      }
    }
    return p;
  }

  const std::string& out() const { return out_; }
  int threads() const { return threads_; }

 private:
  CLI::App* cmd_;
  std::string config_path_;
  std::string out_;
  int threads_ = 0;
  std::map<std::string, int> ints_;
  std::map<std::string, std::uint64_t> u64s_;
  std::map<std::string, std::string> strings_;
  std::map<std::string, bool> flags_;
};

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

fm::SimConfig sim_config_from(const json& p) {
  fm::SimConfig cfg;
  cfg.dgp = fm::dgp_from_name(p.at("dgp"));
  cfg.n = p.at("n");
  cfg.T = p.at("T");
  cfg.seed = p.at("seed");
  cfg.num_factors = p.value("num-factors", 1);
  if (!p.value("lag-coeffs", std::string()).empty())
    cfg.lag_coeffs = parse_double_list(p.at("lag-coeffs"));
  return cfg;
}

// Input resolution shared by the analysis commands: either an existing panel
// CSV or a simulated design.
struct ResolvedInput {
  fm::Panel panel;
  std::optional<fm::SimOutput> sim;
};

ResolvedInput resolve_input(const json& p) {
  const std::string input = p.value("input", "");
  const std::string dgp = p.value("dgp", "");
  if (!input.empty() && !dgp.empty())
    throw std::runtime_error("give either --input or --dgp, not both");
  if (!input.empty()) return {fm::read_panel_csv(input), std::nullopt};
  if (!dgp.empty()) {
    fm::SimOutput out = fm::simulate(sim_config_from(p));
    fm::Panel panel = out.panel;
    return {std::move(panel), std::move(out)};
  }
  throw std::runtime_error("an input panel (--input) or a DGP (--dgp) is required");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct ManifestWriter {
  fs::path dir;
  std::string command;
  json params;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  void note(const fs::path& p) { outputs.push_back(p.filename().string()); }

  void finish() const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    json m = {{"command", command},
              {"version", fm::kVersion},
              {"parameters", params},
              {"outputs", outputs},
              {"duration_seconds", secs}};
    write_json(dir / "manifest.json", m);
  }
};

std::vector<std::string> index_labels(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> out;
  for (Eigen::Index i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// ---------------------------------------------------------------- simulate

void run_simulate(const json& p, ManifestWriter& mw) {
  fm::SimOutput out = fm::simulate(sim_config_from(p));
  fm::write_panel_csv(out.panel, mw.dir / "panel.csv");
  mw.note(mw.dir / "panel.csv");
  const auto& times = out.panel.time_index;
  fm::csv::write_matrix(mw.dir / "true_common.csv", out.true_common,
                        out.panel.series_ids, times);
  mw.note(mw.dir / "true_common.csv");
  fm::csv::write_matrix(mw.dir / "true_idio.csv", out.true_idio,
                        out.panel.series_ids, times);
  mw.note(mw.dir / "true_idio.csv");
  fm::csv::write_matrix(mw.dir / "true_factors.csv", out.true_factors,
                        index_labels("f", out.true_factors.rows()), times);
  mw.note(mw.dir / "true_factors.csv");
  fm::csv::write_matrix(mw.dir / "true_loadings.csv", out.true_loadings,
                        out.panel.series_ids,
                        index_labels("l", out.true_loadings.cols()));
  mw.note(mw.dir / "true_loadings.csv");
  write_json(mw.dir / "config.json",
             {{"dgp", fm::dgp_name(out.config.dgp)},
              {"n", out.config.n},
              {"T", out.config.T},
              {"seed", out.config.seed},
              {"num_factors", out.config.num_factors},
              {"lag_coeffs", out.config.lag_coeffs}});
  mw.note(mw.dir / "config.json");
}

// ------------------------------------------------------------------ ingest

void run_ingest(const json& p, ManifestWriter& mw) {
  const std::string input = p.at("input");
  if (input.empty()) throw std::runtime_error("ingest needs --input");
  std::optional<std::vector<int>> tcodes;
  if (!p.value("tcodes", std::string()).empty()) {
    fm::csv::Table head = fm::csv::read(input);
    std::vector<std::string> ids(head.header.begin() + 1, head.header.end());
    tcodes = fm::read_tcodes_csv(p.at("tcodes").get<std::string>(), ids);
  } else if (!p.value("tcode-list", std::string()).empty()) {
    tcodes = parse_int_list(p.at("tcode-list"));
  }
  fm::Panel panel =
      fm::ingest_csv(input, tcodes, !p.value("no-unit-variance", false));
  fm::write_panel_csv(panel, mw.dir / "panel.csv");
  mw.note(mw.dir / "panel.csv");
  write_json(mw.dir / "ingest_summary.json", {{"n", panel.n()},
                                              {"T", panel.T()},
                                              {"standardized", panel.standardized}});
  mw.note(mw.dir / "ingest_summary.json");
}

// ----------------------------------------------------------------- eigtraj

fm::Permutation ordering_permutation(const Eigen::VectorXd& magnitude,
                                     const std::string& order) {
  const int n = static_cast<int>(magnitude.size());
  std::vector<int> asc(n);
  std::iota(asc.begin(), asc.end(), 0);
  std::stable_sort(asc.begin(), asc.end(),
                   [&](int a, int b) { return magnitude(a) < magnitude(b); });
  fm::Permutation perm;
  perm.map.resize(n);
  if (order == "inc") {
    perm.map = asc;
  } else if (order == "dec") {
    for (int i = 0; i < n; ++i) perm.map[i] = asc[n - 1 - i];
  } else if (order == "alt") {
    // alternate the largest and smallest remaining loadings
    for (int k = 0; 2 * k < n; ++k) {
      perm.map[2 * k] = asc[n - 1 - k];
      if (2 * k + 1 < n) perm.map[2 * k + 1] = asc[k];
    }
  } else {
    throw std::runtime_error("unknown ordering: " + order);
  }
  return perm;
}

void run_eigtraj(const json& p, ManifestWriter& mw) {
  ResolvedInput in = resolve_input(p);
  const std::string order = p.at("order");
  const std::string mode = p.at("mode");
  const int j_max = p.at("jmax");
  const bool population = p.value("population", false);
  const int n = in.panel.n();

  std::vector<fm::Permutation> perms;
  if (order == "random") {
    perms = fm::random_permutations(n, p.at("perms"), p.at("seed"));
  } else {
    if (!in.sim)
      throw std::runtime_error("loading-based orderings need a simulated input");
    Eigen::VectorXd mag = in.sim->true_loadings.rowwise().norm();
    perms = {ordering_permutation(mag, order)};
  }

  fm::TrajectoryOptions opts;
  opts.normalize = p.value("normalize", false);
  opts.keep_permutation_values = p.value("per-permutation", false);
  fm::EigenTrajectory traj;
  if (population) {
    if (!in.sim) throw std::runtime_error("--population needs a simulated input");
    traj = fm::eigenvalue_trajectory_from_cov(fm::population_covariance(*in.sim),
                                              perms, j_max,
                                              fm::default_size_grid(n), opts);
  } else if (mode == "static") {
    traj = fm::eigenvalue_trajectory(in.panel, perms, j_max,
                                     fm::default_size_grid(n), opts);
  } else if (mode == "dynamic") {
    int M = p.at("M");
    if (M <= 0) M = fm::default_bandwidth(in.panel.T());
    std::vector<int> grid = p.value("m-grid", std::string()).empty()
                                ? fm::default_m_grid(n)
                                : parse_int_list(p.at("m-grid"));
    traj = fm::dynamic_eigen_trajectory(in.panel, perms, j_max, grid, M, opts);
  } else {
    throw std::runtime_error("unknown mode: " + mode);
  }

  fm::write_trajectory_csv(traj, mw.dir / "trajectory.csv");
  mw.note(mw.dir / "trajectory.csv");
  json fits = json::array();
  for (int j = 0; j < j_max; ++j) {
    fm::LinearFit fit = fm::linear_growth_fit(traj, j);
    fits.push_back({{"j", j + 1},
                    {"slope", fit.slope},
                    {"intercept", fit.intercept},
                    {"r2", fit.r2}});
  }
  write_json(mw.dir / "linear_fits.json", fits);
  mw.note(mw.dir / "linear_fits.json");
}

// ---------------------------------------------------------------- nfactors

void run_nfactors(const json& p, ManifestWriter& mw) {
  ResolvedInput in = resolve_input(p);
  const std::string method = p.at("method");
  const int k_max = p.at("kmax");
  int M = p.at("M");
  if (M <= 0) M = fm::default_bandwidth(in.panel.T());
  json sel;
  sel["method"] = method;
  if (method == "ratio") {
    fm::SymEigen eig = fm::eigen_sym(fm::autocovariances(in.panel, 0).gamma(0));
    sel["count"] = fm::select_r_ratio(eig.values, k_max);
  } else if (method == "ic") {
    sel["count"] = fm::select_r_ic(in.panel, k_max);
  } else if (method == "tuned-static" || method == "hl-dynamic") {
    fm::TunedSelection tuned =
        method == "tuned-static"
            ? fm::select_r_tuned(in.panel, k_max, p.at("seed"), p.at("perms"))
            : fm::select_q_hl(in.panel, k_max, M, p.at("seed"), p.at("perms"));
    sel["count"] = tuned.count;
    sel["c_star"] = tuned.surface.c_star;
    sel["degraded"] = tuned.surface.degraded;
    fm::write_ic_surface_csv(tuned.surface, (mw.dir / "ic_surface.csv").string());
    mw.note(mw.dir / "ic_surface.csv");
  } else {
    throw std::runtime_error("unknown method: " + method);
  }
  write_json(mw.dir / "selection.json", sel);
  mw.note(mw.dir / "selection.json");
}

// --------------------------------------------------------------- decompose

void run_decompose(const json& p, ManifestWriter& mw) {
  ResolvedInput in = resolve_input(p);
  const int r = p.at("r");
  const int q = p.at("q");
  int M = p.at("M");
  if (M <= 0) M = fm::default_bandwidth(in.panel.T());
  const auto& ids = in.panel.series_ids;
  const auto& times = in.panel.time_index;

  if (r > 0) {
    fm::StaticDecomposition sd = fm::static_decompose(in.panel, r);
    fm::csv::write_matrix(mw.dir / "static_common.csv", sd.common, ids, times);
    fm::csv::write_matrix(mw.dir / "static_idio.csv", sd.idio, ids, times);
    fm::csv::write_matrix(mw.dir / "factors.csv", sd.factors,
                          index_labels("f", r), times);
    fm::csv::write_matrix(mw.dir / "loadings.csv", sd.loadings, ids,
                          index_labels("f", r));
    for (const char* f :
         {"static_common.csv", "static_idio.csv", "factors.csv", "loadings.csv"})
      mw.note(mw.dir / f);
  }
  if (q > 0) {
    fm::DynamicDecomposition dd = fm::gdfm_decompose(in.panel, q, M);
    std::vector<std::string> valid_times(
        times.begin() + dd.t_begin,
        times.begin() + dd.t_begin + dd.valid_length());
    fm::csv::write_matrix(mw.dir / "dyn_common.csv", dd.common, ids, valid_times);
    fm::csv::write_matrix(mw.dir / "dyn_idio.csv", dd.idio, ids, valid_times);
    fm::write_filters_csv(dd, mw.dir / "filters.csv");
    for (const char* f : {"dyn_common.csv", "dyn_idio.csv", "filters.csv"})
      mw.note(mw.dir / f);
  }
  if (r > 0 && q > 0) {
    fm::ThreeTermDecomposition tt = fm::three_term(in.panel, r, q, M);
    std::vector<std::string> valid_times(
        times.begin() + tt.t_begin,
        times.begin() + tt.t_begin + tt.valid_length());
    fm::csv::write_matrix(mw.dir / "weak_common.csv", tt.weak_common, ids,
                          valid_times);
    mw.note(mw.dir / "weak_common.csv");
    const int max_lag = std::min(p.at("max-lag").get<int>(), tt.valid_length() / 4);
    write_json(mw.dir / "orthogonality.json",
               fm::to_json(fm::orthogonality_report(tt, max_lag)));
    mw.note(mw.dir / "orthogonality.json");
  }
  if (p.value("export-spectrum", false)) {
    fm::SpectralDensity sd = fm::estimate_spectrum(in.panel, M);
    fm::write_spectrum_binary(sd, mw.dir / "spectrum.bin");
    fm::write_spectrum_csv(fm::dynamic_eigens(sd, std::min(in.panel.n(), 8)),
                           mw.dir / "spectrum.csv");
    mw.note(mw.dir / "spectrum.bin");
    mw.note(mw.dir / "spectrum.csv");
  }
}

// ---------------------------------------------------------------- forecast

void run_forecast(const json& p, ManifestWriter& mw) {
  ResolvedInput in = resolve_input(p);
  const fm::ForecastMode mode = fm::mode_from_name(p.at("mode"));
  const bool oracle = mode == fm::ForecastMode::oracle_stat ||
                      mode == fm::ForecastMode::oracle_dyn;
  if (oracle && !in.sim)
    throw std::runtime_error("oracle forecast modes need a simulated input");
  int M = p.at("M");
  if (M <= 0) M = fm::default_bandwidth(in.panel.T());
  fm::ForecastOptions opts;
  opts.p_lags = p.at("plags");
  opts.n_factors = p.value("n-factors", 0);
  opts.augment_idio_with_common = p.value("augment-idio", false);
  fm::ForecastSet set = fm::rolling_eval(
      in.panel, mode, in.sim ? &*in.sim : nullptr,
      p.at("target").get<int>() - 1, p.at("horizon"), p.at("window"), p.at("r-or-q"),
      M, opts, p.at("stride"));
  fm::write_forecast_csv(set, mw.dir / "forecast.csv");
  mw.note(mw.dir / "forecast.csv");
  write_json(mw.dir / "summary.json", fm::forecast_summary({set}));
  mw.note(mw.dir / "summary.json");
}

// ------------------------------------------------------------------- rerun

int dispatch(const std::string& command, const json& params,
             const std::string& out, int threads) {
  if (threads > 0) fm::set_max_threads(threads);
  fs::create_directories(out);
  ManifestWriter mw{fs::path(out), command, params};
  if (command == "simulate") run_simulate(params, mw);
  else if (command == "ingest") run_ingest(params, mw);
  else if (command == "eigtraj") run_eigtraj(params, mw);
  else if (command == "nfactors") run_nfactors(params, mw);
  else if (command == "decompose") run_decompose(params, mw);
  else if (command == "forecast") run_forecast(params, mw);
  else throw std::runtime_error("unknown command in manifest: " + command);
  mw.finish();
  return 0;
}

void run_rerun(const std::string& manifest_path, const std::string& out,
               int threads) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  json m = json::parse(in);
  dispatch(m.at("command"), m.at("parameters"), out, threads);
}

void add_input_options(ParamSet& ps) {
  ps.add_string("input", "", "panel CSV (header row of ids, first column time)");
  ps.add_string("dgp", "",
                "simulated design: block_one_factor, rand_one_factor, "
                "rand_two_factor, dynamic_loading, white_noise");
  ps.add_int("n", 240, "cross-sectional size (simulated input)");
  ps.add_int("T", 100, "time-series length (simulated input)");
  ps.add_u64("seed", 1, "root seed");
  ps.add_int("num-factors", 1, "dynamic_loading: number of common shocks");
  ps.add_string("lag-coeffs", "", "dynamic_loading: per-lag scales, e.g. 1,1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fmtk: factor-model toolkit for high-dimensional time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fm::kVersion);

  const char* env_threads = std::getenv("FMTK_THREADS");
  if (env_threads) fm::set_max_threads(std::atoi(env_threads));

  auto* c_sim = app.add_subcommand("simulate", "generate a panel with known truth");
  ParamSet ps_sim(c_sim);
  add_input_options(ps_sim);

  auto* c_ing = app.add_subcommand("ingest", "read a CSV with stationarity transforms");
  ParamSet ps_ing(c_ing);
  ps_ing.add_string("input", "", "raw CSV file");
  ps_ing.add_string("tcodes", "", "sidecar CSV of (series_id, tcode)");
  ps_ing.add_string("tcode-list", "", "comma-separated transform codes");
  ps_ing.add_flag("no-unit-variance", "demean only, keep original scales");

  auto* c_tr = app.add_subcommand("eigtraj", "eigenvalue trajectories over sub-panels");
  ParamSet ps_tr(c_tr);
  add_input_options(ps_tr);
  ps_tr.add_string("mode", "static", "static | dynamic");
  ps_tr.add_string("order", "random", "random | inc | dec | alt");
  ps_tr.add_int("perms", 100, "random permutations to average over");
  ps_tr.add_int("jmax", 1, "number of eigenvalues to track");
  ps_tr.add_int("M", 0, "bandwidth (0 = default)");
  ps_tr.add_string("m-grid", "", "comma-separated sub-panel sizes (dynamic mode)");
  ps_tr.add_flag("normalize", "divide by the full-panel top eigenvalue");
  ps_tr.add_flag("population", "use the population covariance of the DGP");
  ps_tr.add_flag("per-permutation", "also write per-permutation rows");

  auto* c_nf = app.add_subcommand("nfactors", "select the number of factors");
  ParamSet ps_nf(c_nf);
  add_input_options(ps_nf);
  ps_nf.add_string("method", "ic", "ratio | ic | tuned-static | hl-dynamic");
  ps_nf.add_int("kmax", 10, "largest count considered");
  ps_nf.add_int("perms", 20, "permutations for the tuned criteria");
  ps_nf.add_int("M", 0, "bandwidth (0 = default)");

  auto* c_dc = app.add_subcommand("decompose", "static / dynamic / three-term split");
  ParamSet ps_dc(c_dc);
  add_input_options(ps_dc);
  ps_dc.add_int("r", 0, "static factor count (0 = skip static)");
  ps_dc.add_int("q", 0, "dynamic shock count (0 = skip dynamic)");
  ps_dc.add_int("M", 0, "bandwidth (0 = default)");
  ps_dc.add_int("max-lag", 8, "orthogonality report lag range");
  ps_dc.add_flag("export-spectrum", "write spectrum.bin and spectrum.csv");

  auto* c_fc = app.add_subcommand("forecast", "rolling out-of-sample evaluation");
  ParamSet ps_fc(c_fc);
  add_input_options(ps_fc);
  ps_fc.add_string("mode", "stat", "stat | dyn | oracle_stat | oracle_dyn");
  ps_fc.add_int("target", 1, "target series (1-based)");
  ps_fc.add_int("horizon", 1, "forecast horizon");
  ps_fc.add_int("window", 0, "rolling window length");
  ps_fc.add_int("plags", 4, "lag order of the direct projections");
  ps_fc.add_int("r-or-q", 1, "factor count for the window decompositions");
  ps_fc.add_int("M", 0, "bandwidth (0 = default)");
  ps_fc.add_int("stride", 1, "origin spacing");
  ps_fc.add_int("n-factors", 0, "override the factor-count rule");
  ps_fc.add_flag("augment-idio", "add common factor lags to the idio design");

  auto* c_rr = app.add_subcommand("rerun", "replay a manifest");
  std::string manifest_path, rerun_out;
  int rerun_threads = 0;
  c_rr->add_option("manifest", manifest_path, "manifest.json from a previous run")
      ->required();
  c_rr->add_option("--out", rerun_out, "output directory")->required();
  c_rr->add_option("--threads", rerun_threads, "cap on worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_rr->parsed()) {
      run_rerun(manifest_path, rerun_out, rerun_threads);
      return 0;
    }
    struct Cmd {
      CLI::App* app;
      ParamSet* ps;
      const char* name;
    };
    for (const Cmd& c :
         {Cmd{c_sim, &ps_sim, "simulate"}, Cmd{c_ing, &ps_ing, "ingest"},
          Cmd{c_tr, &ps_tr, "eigtraj"}, Cmd{c_nf, &ps_nf, "nfactors"},
          Cmd{c_dc, &ps_dc, "decompose"}, Cmd{c_fc, &ps_fc, "forecast"}}) {
      if (c.app->parsed())
        return dispatch(c.name, c.ps->resolve(), c.ps->out(), c.ps->threads());
    }
    throw std::runtime_error("no subcommand given");
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "runtime"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  }
}
