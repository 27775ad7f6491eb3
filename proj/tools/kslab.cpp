// kslab - numerical laboratory for radial quasilinear chemotaxis systems.
//
// Subcommands: classify, region-scan, init-data, sweep-eta, simulate,
// energy, refine. Exit codes: 0 success, 2 validation, 3 runtime,
// 4 outcome-expectation mismatch (for CI gating).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kslab/config.hpp"
#include "kslab/io.hpp"
#include "kslab/orchestrator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitExpectation = 4;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kslab::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

kslab::ExperimentConfig load_config(const std::string& path) {
  if (path.empty())
    throw kslab::ConfigError("this subcommand needs --config <file>");
  return kslab::parse_config(slurp(path));
}

void print_verdict(const kslab::RegimeVerdict& v) {
  std::cout << "regime: " << kslab::to_string(v.regime) << "\n";
  std::cout << "  m - q - (n-2)/n = " << kslab::format_double(v.margin_supercritical)
            << (v.cond_supercritical ? "  (supercritical)" : "") << "\n";
  std::cout << "  q > 0: " << (v.cond_q_positive ? "yes" : "no") << "\n";
  if (v.cond_main.denominator_clamped)
    std::cout << "  main condition: denominator clamped to 0, "
              << (v.cond_main.holds ? "holds by convention" : "fails") << "\n";
  else if (v.cond_main.lhs)
    std::cout << "  main condition lhs = " << kslab::format_double(*v.cond_main.lhs)
              << (v.cond_main.holds ? " < 2" : " >= 2") << "\n";
  for (const auto& note : v.notes) std::cout << "  " << note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for radial quasilinear chemotaxis systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned workers = 0;
  unsigned seed = 0;  // reserved; no stochastic components currently
  bool force = false, dry_run = false;
  app.add_option("--config", config_path, "experiment config file (JSON)");
  app.add_option("--out-dir", out_dir, "output directory override");
  app.add_option("--workers", workers, "worker threads (0 = hardware)");
  app.add_option("--seed", seed, "reserved for future stochastic components");
  app.add_flag("--force", force, "simulate even when the classifier says GB/IFTBU");
  app.add_flag("--dry-run", dry_run, "classify and choose parameters only");

  auto* cmd_classify = app.add_subcommand("classify", "classify a parameter point");
  int cl_n = 2;
  double cl_m = 1.0, cl_q = 1.0;
  cmd_classify->add_option("--n", cl_n, "spatial dimension")->required();
  cmd_classify->add_option("--m", cl_m, "diffusion exponent")->required();
  cmd_classify->add_option("--q", cl_q, "sensitivity exponent")->required();

  auto* cmd_scan = app.add_subcommand("region-scan", "map regimes over an (m, q) box");
  int sc_n = 2, sc_res = 49;
  double sc_m0 = -1.0, sc_m1 = 1.4, sc_q0 = -1.0, sc_q1 = 1.4;
  std::string sc_out = "region_scan.csv";
  cmd_scan->add_option("--n", sc_n)->required();
  cmd_scan->add_option("--m-min", sc_m0);
  cmd_scan->add_option("--m-max", sc_m1);
  cmd_scan->add_option("--q-min", sc_q0);
  cmd_scan->add_option("--q-max", sc_q1);
  cmd_scan->add_option("--resolution", sc_res);
  cmd_scan->add_option("--out", sc_out, "CSV output path");

  auto* cmd_init = app.add_subcommand("init-data", "build one member of the initial-data family");
  double id_mass = 0.0, id_eta = 0.0;
  std::size_t id_cells = 0;
  std::string id_out = "initdata";
  cmd_init->add_option("--mass", id_mass, "total cell mass (overrides config)");
  cmd_init->add_option("--eta", id_eta, "concentration parameter (overrides config)");
  cmd_init->add_option("--grid-cells", id_cells, "cell count (overrides config)");
  cmd_init->add_option("--out", id_out, "output directory");

  auto* cmd_sweep = app.add_subcommand("sweep-eta", "energy of the family over eta halvings");
  int sw_halvings = 0;
  cmd_sweep->add_option("--halvings", sw_halvings, "number of halvings (overrides config)");

  auto* cmd_sim = app.add_subcommand("simulate", "integrate the system from the family data");

  auto* cmd_energy = app.add_subcommand("energy", "recompute F and D from stored snapshots");
  std::string en_run_dir;
  std::string en_out = "energy_recomputed.csv";
  cmd_energy->add_option("--run-dir", en_run_dir, "directory holding snapshots/")->required();
  cmd_energy->add_option("--out", en_out, "CSV output path");

  auto* cmd_refine = app.add_subcommand("refine", "grid/time refinement study");
  int rf_levels = 3;
  cmd_refine->add_option("--levels", rf_levels, "number of refinement levels");

  CLI11_PARSE(app, argc, argv);

  kslab::RunOptions opts;
  opts.force = force;
  opts.dry_run = dry_run;
  opts.out_dir_override = out_dir;
  opts.workers = workers;

  try {
    if (cmd_classify->parsed()) {
      print_verdict(kslab::classify(cl_n, cl_m, cl_q));
      return kExitOk;
    }
    if (cmd_scan->parsed()) {
      kslab::write_region_scan(sc_n, {sc_m0, sc_m1}, {sc_q0, sc_q1}, sc_res,
                               sc_out, workers);
      std::cout << "wrote " << sc_out << "\n";
      return kExitOk;
    }
    if (cmd_init->parsed()) {
      auto cfg = load_config(config_path);
      if (id_mass > 0.0) cfg.initdata.mass = id_mass;
      if (id_eta > 0.0) cfg.initdata.eta = id_eta;
      if (id_cells > 0) cfg.grid.cells = id_cells;
      const auto model = cfg.make_model();
      std::optional<kslab::AdmissibilityCertificate> cert;
      if (cfg.model.certify) cert = kslab::certify_admissibility(model, 1e6, 400);
      auto base = kslab::choose_parameters(model, cfg.initdata.mass, cert,
                                           cfg.initdata.overrides);
      const double eta = cfg.initdata.eta.value_or(base.eta0 / 4.0);
      const auto spec = base.with_eta(eta);
      const auto grid = kslab::make_grid(cfg, eta);
      const auto u = kslab::build_u0(spec, grid);
      const auto v = kslab::build_v0(spec, grid);
      const std::filesystem::path dir = id_out;
      std::filesystem::create_directories(dir);
      {
        kslab::CsvWriter csv(dir / "u.csv");
        csv.metadata("cell density");
        csv.header({"r", "u"});
        for (std::size_t i = 0; i < grid.cells(); ++i)
          csv.row({grid.centers[i], u[i]});
      }
      {
        kslab::CsvWriter csv(dir / "v.csv");
        csv.metadata("signal density");
        csv.header({"r", "v"});
        for (std::size_t i = 0; i < grid.cells(); ++i)
          csv.row({grid.centers[i], v[i]});
      }
      const auto norms = kslab::verify_uniform_bounds(spec, grid, {eta}, false);
      nlohmann::ordered_json j;
      j["version"] = kslab::kVersion;
      j["spec"] = kslab::detail::spec_to_json(spec);
      j["mass_discrete"] = u.integral();
      j["a_eta"] = kslab::discrete_a_eta(spec, grid, eta);
      j["norms"] = {{"sup_ralpha_u", norms.per_eta[0].sup_ralpha_u},
                    {"v_w1p", norms.per_eta[0].v_w1p},
                    {"rbeta_v_w1inf", norms.per_eta[0].rbeta_v_w1inf}};
      kslab::write_text_file(dir / "initdata.json", j.dump(2) + "\n");
      std::cout << "wrote " << (dir / "u.csv").string()
                << ", v.csv, initdata.json\n";
      return kExitOk;
    }
    if (cmd_sweep->parsed()) {
      auto cfg = load_config(config_path);
      if (sw_halvings > 0) cfg.initdata.halvings = sw_halvings;
      const auto sweep = kslab::sweep_eta(cfg, opts);
      std::cout << "eta sweep over " << sweep.rows.size() << " halvings: F from "
                << kslab::format_double(sweep.rows.front().record.F) << " to "
                << kslab::format_double(sweep.rows.back().record.F)
                << (sweep.diverges ? " (diverging)" : " (not diverging)") << "\n";
      return kExitOk;
    }
    if (cmd_sim->parsed()) {
      const auto cfg = load_config(config_path);
      const auto res = kslab::run_experiment(cfg, opts);
      if (res.simulated) {
        std::cout << "outcome: " << kslab::to_string(res.solver.outcome)
                  << " at t = " << kslab::format_double(res.solver.t_final)
                  << " after " << res.solver.steps << " steps\n";
        std::cout << "report: " << (res.out_dir / "report.json").string() << "\n";
        if (!res.expectation_matched) {
          std::cerr << "expected outcome "
                    << kslab::to_string(*res.expected_outcome)
                    << " from the classification, got "
                    << kslab::to_string(res.solver.outcome) << "\n";
          return kExitExpectation;
        }
      } else {
        std::cout << "dry run: regime " << kslab::to_string(res.verdict.regime)
                  << ", report in " << (res.out_dir / "report.json").string()
                  << "\n";
      }
      return kExitOk;
    }
    if (cmd_energy->parsed()) {
      const auto cfg = load_config(config_path);
      const auto records = kslab::recompute_energy(cfg, en_run_dir, en_out);
      std::cout << "recomputed " << records.size() << " records into " << en_out
                << "\n";
      return kExitOk;
    }
    if (cmd_refine->parsed()) {
      const auto cfg = load_config(config_path);
      const auto study = kslab::refinement_study(cfg, rf_levels, opts);
      for (std::size_t l = 1; l < study.levels.size(); ++l)
        std::cout << "level " << l << ": cells " << study.levels[l].cells
                  << ", identity order "
                  << kslab::format_double(study.order_identity[l - 1])
                  << ", stop-time shift "
                  << kslab::format_double(study.blowup_shift[l - 1]) << "\n";
      return kExitOk;
    }
  } catch (const kslab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const kslab::PipelineRefusal& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const kslab::InfeasibleParameters& e) {
    std::cerr << "infeasible parameters: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
