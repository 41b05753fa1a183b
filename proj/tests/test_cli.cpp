// End-to-end checks of the fmtk binary (path supplied via FMTK_BIN).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmtk_bin() {
  const char* bin = std::getenv("FMTK_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

int run(const std::string& args, const fs::path& stderr_to = {}) {
  std::string cmd = fmtk_bin() + " " + args;
  if (!stderr_to.empty()) cmd += " 2>" + stderr_to.string();
  else cmd += " 2>/dev/null";
  cmd += " >/dev/null";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

}  // namespace

TEST_CASE("simulate writes outputs and a manifest; rerun reproduces them") {
  testsup::TempDir dir;
  const fs::path out1 = dir.path() / "run1";
  const fs::path out2 = dir.path() / "run2";
  REQUIRE(run("simulate --dgp rand_one_factor --n 30 --T 50 --seed 9 --out " +
              out1.string()) == 0);
  for (const char* f : {"panel.csv", "true_common.csv", "true_idio.csv",
                        "true_factors.csv", "true_loadings.csv", "config.json",
                        "manifest.json"})
    CHECK(fs::exists(out1 / f));

  json manifest = json::parse(slurp(out1 / "manifest.json"));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["parameters"]["seed"] == 9);

  REQUIRE(run("rerun " + (out1 / "manifest.json").string() + " --out " +
              out2.string()) == 0);
  for (const char* f : {"panel.csv", "true_common.csv", "true_idio.csv",
                        "true_factors.csv", "true_loadings.csv", "config.json"})
    CHECK(same_bytes(out1 / f, out2 / f));
}

TEST_CASE("invalid input yields a nonzero exit and error JSON on stderr") {
  testsup::TempDir dir;
  const fs::path err = dir.path() / "err.txt";
  const int rc = run("nfactors --input /nonexistent.csv --method ic --out " +
                         (dir.path() / "o").string(),
                     err);
  CHECK(rc != 0);
  json e = json::parse(slurp(err));
  CHECK(e.contains("error"));
  CHECK(e["error"].contains("message"));
}

TEST_CASE("nfactors pipeline on a simulated design") {
  testsup::TempDir dir;
  const fs::path out = dir.path() / "nf";
  REQUIRE(run("nfactors --dgp block_one_factor --n 120 --T 100 --seed 3 "
              "--method ic --out " +
              out.string()) == 0);
  json sel = json::parse(slurp(out / "selection.json"));
  CHECK(sel["count"] == 1);
}

TEST_CASE("eigtraj with deterministic orderings writes trajectory and fits") {
  testsup::TempDir dir;
  const fs::path out = dir.path() / "tr";
  REQUIRE(run("eigtraj --dgp block_one_factor --n 60 --T 80 --seed 2 "
              "--order alt --population --normalize --out " +
              out.string()) == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
  json fits = json::parse(slurp(out / "linear_fits.json"));
  CHECK(fits[0]["r2"].get<double>() >= 0.999);
}

TEST_CASE("eigtraj per-permutation rows and tuned selection surface") {
  testsup::TempDir dir;
  const fs::path tr = dir.path() / "tr";
  REQUIRE(run("eigtraj --dgp rand_one_factor --n 30 --T 60 --seed 4 "
              "--order random --perms 3 --per-permutation --out " +
              tr.string()) == 0);
  std::string csv = slurp(tr / "trajectory.csv");
  CHECK(csv.find("\n0,1,") != std::string::npos);   // permutation 0 rows
  CHECK(csv.find("avg,1,") != std::string::npos);   // averaged rows

  const fs::path nf = dir.path() / "nf";
  REQUIRE(run("nfactors --dgp block_one_factor --n 90 --T 120 --seed 5 "
              "--method tuned-static --kmax 6 --out " +
              nf.string()) == 0);
  json sel = json::parse(slurp(nf / "selection.json"));
  CHECK(sel["count"] == 1);
  CHECK(sel.contains("c_star"));
  CHECK(fs::exists(nf / "ic_surface.csv"));
}

TEST_CASE("decompose writes components, filters, and the orthogonality report") {
  testsup::TempDir dir;
  const fs::path out = dir.path() / "dc";
  REQUIRE(run("decompose --dgp dynamic_loading --n 40 --T 400 --seed 5 "
              "--r 1 --q 1 --export-spectrum --out " +
              out.string()) == 0);
  for (const char* f : {"static_common.csv", "static_idio.csv", "factors.csv",
                        "loadings.csv", "dyn_common.csv", "dyn_idio.csv",
                        "filters.csv", "weak_common.csv", "orthogonality.json",
                        "spectrum.bin", "spectrum.csv"})
    CHECK(fs::exists(out / f));
}

TEST_CASE("forecast command produces per-origin rows and a summary") {
  testsup::TempDir dir;
  const fs::path out = dir.path() / "fc";
  REQUIRE(run("forecast --dgp dynamic_loading --n 40 --T 600 --seed 7 "
              "--mode oracle_dyn --target 1 --horizon 1 --window 500 --stride 25 --out " +
              out.string()) == 0);
  json summary = json::parse(slurp(out / "summary.json"));
  CHECK(summary["per_mode"].contains("oracle_dyn"));
  CHECK(fs::exists(out / "forecast.csv"));
}

TEST_CASE("config file supplies defaults, flags win") {
  testsup::TempDir dir;
  const fs::path cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"dgp": "white_noise", "n": 24, "T": 60, "seed": 4})";
  const fs::path out = dir.path() / "cfgrun";
  REQUIRE(run("simulate --config " + cfg.string() + " --n 30 --out " +
              out.string()) == 0);
  json config = json::parse(slurp(out / "config.json"));
  CHECK(config["dgp"] == "white_noise");  // from config file
  CHECK(config["n"] == 30);               // flag overrides config
  CHECK(config["T"] == 60);
}

TEST_CASE("ingest command applies transform codes") {
  testsup::TempDir dir;
  const fs::path raw = dir.path() / "raw.csv";
  std::ofstream(raw) << "time,a,b\nt1,1.0,2.0\nt2,2.0,1.0\nt3,4.0,3.0\nt4,3.0,2.5\n";
  const fs::path out = dir.path() / "ing";
  REQUIRE(run("ingest --input " + raw.string() + " --tcode-list 2,1 --out " +
              out.string()) == 0);
  json s = json::parse(slurp(out / "ingest_summary.json"));
  CHECK(s["n"] == 2);
  CHECK(s["T"] == 3);
}
