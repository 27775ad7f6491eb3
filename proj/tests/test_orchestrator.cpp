#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kslab/orchestrator.hpp"

namespace fs = std::filesystem;
using kslab::ExperimentConfig;
using kslab::parse_config;
using kslab::RunOptions;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("test_out") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// small and fast: supercritical point, coarse grid, short horizon
ExperimentConfig small_ftbu_config() {
  return parse_config(R"({
    "model": {"kind": "prototype", "n": 3, "R": 0.1, "m": 1.0, "q": 1.0},
    "initdata": {"mass": 1.0, "eta": 0.01, "gamma": 0.9, "delta": 4.2},
    "grid": {"cells": 128},
    "solver": {"t_end": 2e-5, "u_blowup_threshold": 1e12},
    "outputs": {"trace_stride": 4, "snapshot_stride": 50}
  })");
}

}  // namespace

TEST_CASE("experiment pipeline writes its artifacts", "[orchestrator]") {
  const auto cfg = small_ftbu_config();
  RunOptions opts;
  opts.out_dir_override = fresh_dir("pipeline").string();
  const auto res = kslab::run_experiment(cfg, opts);
  CHECK(res.simulated);
  CHECK(res.verdict.regime == kslab::Regime::FTBU);
  CHECK(fs::exists(res.out_dir / "report.json"));
  CHECK(fs::exists(res.out_dir / "trace.csv"));
  CHECK(fs::exists(res.out_dir / "snapshots"));
  CHECK(res.solver.trace.size() == res.solver.stats.size());
  CHECK(res.report.contains("odi"));
  CHECK(res.report["energy"].contains("F0"));
  // mass conserved along the run
  const double m0 = res.solver.trace.front().mass_u;
  CHECK(res.solver.trace.back().mass_u == Catch::Approx(m0).epsilon(1e-12));
}

TEST_CASE("identical configs give byte-identical outputs", "[orchestrator]") {
  const auto cfg = small_ftbu_config();
  RunOptions a, b;
  a.out_dir_override = fresh_dir("det_a").string();
  b.out_dir_override = fresh_dir("det_b").string();
  a.workers = b.workers = 2;
  kslab::run_experiment(cfg, a);
  kslab::run_experiment(cfg, b);
  CHECK(slurp(fs::path(a.out_dir_override) / "report.json") ==
        slurp(fs::path(b.out_dir_override) / "report.json"));
  CHECK(slurp(fs::path(a.out_dir_override) / "trace.csv") ==
        slurp(fs::path(b.out_dir_override) / "trace.csv"));
}

TEST_CASE("bounded regimes are refused without force", "[orchestrator]") {
  auto cfg = parse_config(R"({
    "model": {"kind": "prototype", "n": 3, "R": 0.1, "m": 1.2, "q": 0.5},
    "initdata": {"mass": 1.0, "eta": 0.01, "gamma": 0.9, "delta": 4.2},
    "grid": {"cells": 128},
    "solver": {"t_end": 1e-6}
  })");
  RunOptions opts;
  opts.out_dir_override = fresh_dir("refusal").string();
  CHECK_THROWS_AS(kslab::run_experiment(cfg, opts), kslab::PipelineRefusal);
  opts.force = true;
  const auto res = kslab::run_experiment(cfg, opts);
  CHECK(res.simulated);
  CHECK(res.expected_outcome == kslab::RunOutcome::completed);
}

TEST_CASE("dry run stops after parameter selection", "[orchestrator]") {
  const auto cfg = small_ftbu_config();
  RunOptions opts;
  opts.dry_run = true;
  opts.out_dir_override = fresh_dir("dry").string();
  const auto res = kslab::run_experiment(cfg, opts);
  CHECK_FALSE(res.simulated);
  CHECK(res.report.contains("dry_run"));
  CHECK(fs::exists(res.out_dir / "report.json"));
  CHECK_FALSE(fs::exists(res.out_dir / "trace.csv"));
}

TEST_CASE("eta sweep writes the family table", "[orchestrator]") {
  auto cfg = parse_config(R"({
    "model": {"kind": "prototype", "n": 3, "R": 0.01, "m": 1.0, "q": 1.0},
    "initdata": {"mass": 1.0, "halvings": 6, "alpha": 8.0, "gamma": 0.75, "delta": 4.05},
    "grid": {"cells": 768}
  })");
  RunOptions opts;
  opts.out_dir_override = fresh_dir("sweep").string();
  opts.workers = 2;
  const auto sweep = kslab::sweep_eta(cfg, opts);
  REQUIRE(sweep.rows.size() == 6);
  CHECK(sweep.diverges);
  CHECK(fs::exists(fs::path(opts.out_dir_override) / "eta_sweep.csv"));
  // deterministic under repeated parallel evaluation
  RunOptions opts2 = opts;
  opts2.out_dir_override = fresh_dir("sweep2").string();
  kslab::sweep_eta(cfg, opts2);
  CHECK(slurp(fs::path(opts.out_dir_override) / "eta_sweep.csv") ==
        slurp(fs::path(opts2.out_dir_override) / "eta_sweep.csv"));
}

TEST_CASE("region scan CSV matches the in-memory grid", "[orchestrator]") {
  const auto out = fresh_dir("scan") / "map.csv";
  const auto grid = kslab::write_region_scan(2, {-1.0, 1.4}, {-1.0, 1.4}, 9,
                                             out, 2);
  CHECK(fs::exists(out));
  const auto text = slurp(out);
  CHECK(text.find("m,q,regime") != std::string::npos);
  CHECK(grid.verdicts.size() == 81);
}

TEST_CASE("energy recomputation reproduces trace values", "[orchestrator]") {
  const auto cfg = small_ftbu_config();
  RunOptions opts;
  opts.out_dir_override = fresh_dir("energy").string();
  const auto res = kslab::run_experiment(cfg, opts);
  const auto records = kslab::recompute_energy(cfg, res.out_dir);
  REQUIRE(!records.empty());
  // the first snapshot is the initial state: F must agree exactly
  CHECK(records.front().F == Catch::Approx(res.solver.trace.front().F).epsilon(1e-14));
  CHECK(records.front().t == 0.0);
}

TEST_CASE("refinement study reports observed orders", "[orchestrator]") {
  auto cfg = parse_config(R"({
    "model": {"kind": "prototype", "n": 3, "R": 0.1, "m": 1.0, "q": 1.0},
    "initdata": {"mass": 1.0, "eta": 0.02, "gamma": 0.9, "delta": 4.2},
    "grid": {"cells": 48},
    "solver": {"t_end": 5e-5, "u_blowup_threshold": 1e12},
    "outputs": {"trace_stride": 2}
  })");
  RunOptions opts;
  opts.out_dir_override = fresh_dir("refine").string();
  const auto study = kslab::refinement_study(cfg, 2, opts);
  REQUIRE(study.levels.size() == 2);
  REQUIRE(study.order_identity.size() == 1);
  CHECK(study.levels[1].cells == 96);
  CHECK(study.levels[1].cfl == Catch::Approx(0.45));
  CHECK(fs::exists(fs::path(opts.out_dir_override) / "refinement.csv"));
  CHECK_THROWS_AS(kslab::refinement_study(cfg, 1, opts), std::invalid_argument);
}
