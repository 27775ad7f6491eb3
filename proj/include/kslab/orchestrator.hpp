#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kslab/config.hpp"
#include "kslab/energetics.hpp"
#include "kslab/initdata.hpp"
#include "kslab/io.hpp"
#include "kslab/motility.hpp"
#include "kslab/regime.hpp"
#include "kslab/solver.hpp"

namespace kslab {

inline constexpr const char* kVersion = "kslab 0.1.0";

/// Raised when a pipeline labeled for blow-up study is pointed at a
/// parameter point the classifier rules out; --force overrides.
class PipelineRefusal : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  bool force = false;
  bool dry_run = false;
  std::string out_dir_override;
  unsigned workers = 0;  // 0 = hardware
};

namespace detail {

inline unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Static partition of [0, jobs) across workers; slot-indexed results keep
/// the merged output independent of scheduling.
template <class Fn>
void parallel_for(std::size_t jobs, unsigned workers, const Fn& fn) {
  workers = std::min<std::size_t>(worker_count(workers), jobs ? jobs : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < jobs; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

using ordered_json = nlohmann::ordered_json;

inline ordered_json verdict_to_json(const RegimeVerdict& v) {
  ordered_json j;
  j["regime"] = to_string(v.regime);
  j["supercritical"] = v.cond_supercritical;
  j["supercritical_margin"] = v.margin_supercritical;
  j["q_positive"] = v.cond_q_positive;
  j["main_condition_holds"] = v.cond_main.holds;
  if (v.cond_main.lhs)
    j["main_condition_lhs"] = *v.cond_main.lhs;
  else
    j["main_condition_lhs"] = nullptr;
  j["main_condition_clamped"] = v.cond_main.denominator_clamped;
  j["notes"] = v.notes;
  return j;
}

inline ordered_json spec_to_json(const InitialDataSpec& s) {
  ordered_json j;
  j["mass"] = s.Mu;
  j["eta"] = s.eta;
  j["eta0"] = s.eta0;
  j["alpha"] = s.alpha;
  j["p"] = s.p;
  j["beta"] = s.beta;
  j["gamma"] = s.gamma;
  if (s.delta)
    j["delta"] = *s.delta;
  else
    j["delta"] = nullptr;
  j["theta"] = s.theta_used;
  return j;
}

inline ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["model"] = {{"kind", cfg.model.kind}, {"n", cfg.model.n},
                {"R", cfg.model.R},       {"m", cfg.model.m},
                {"q", cfg.model.q},       {"certify", cfg.model.certify}};
  if (cfg.model.s0) j["model"]["s0"] = *cfg.model.s0;
  j["initdata"] = {{"mass", cfg.initdata.mass},
                   {"halvings", cfg.initdata.halvings}};
  if (cfg.initdata.eta) j["initdata"]["eta"] = *cfg.initdata.eta;
  const auto put_opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j["initdata"][key] = *v;
  };
  put_opt("alpha", cfg.initdata.overrides.alpha);
  put_opt("beta", cfg.initdata.overrides.beta);
  put_opt("p", cfg.initdata.overrides.p);
  put_opt("gamma", cfg.initdata.overrides.gamma);
  put_opt("delta", cfg.initdata.overrides.delta);
  j["grid"] = {{"cells", cfg.grid.cells},
               {"grading", cfg.grid.grading},
               {"resolve_factor", cfg.grid.resolve_factor}};
  j["solver"] = {{"cfl_safety", cfg.solver.cfl_safety},
                 {"dt_min", cfg.solver.dt_min},
                 {"u_blowup_threshold", cfg.solver.u_blowup_threshold},
                 {"t_end", cfg.solver.t_end},
                 {"chemotaxis_switch", cfg.solver.chemotaxis_switch},
                 {"clip_budget", cfg.solver.clip_budget}};
  j["outputs"] = {{"dir", cfg.outputs.dir},
                  {"trace_stride", cfg.outputs.trace_stride},
                  {"snapshot_stride", cfg.outputs.snapshot_stride}};
  return j;
}

}  // namespace detail

/// Classification driving the pipeline gate. The log-modified pair is an
/// admissible m = q model whose blow-up certification comes with the model
/// family itself, not from the prototype lattice.
inline RegimeVerdict classify_model(const ExperimentConfig& cfg) {
  if (cfg.model.kind == "prototype-log") {
    RegimeVerdict v;
    v.regime = cfg.model.m > 0.0 ? Regime::FTBU : Regime::UNKNOWN;
    v.cond_supercritical = true;
    v.margin_supercritical = -(cfg.model.q * 0.25) / 2.0;  // via q2 = 1.25 q
    v.cond_q_positive = cfg.model.m > 0.0;
    v.cond_main.holds = v.cond_q_positive;
    v.notes.push_back("log-modified sensitivity: admissible pair for every m = q > 0");
    return v;
  }
  return classify(cfg.model.n, cfg.model.m, cfg.model.q);
}

struct ExperimentResult {
  RegimeVerdict verdict;
  InitialDataSpec spec;
  bool simulated = false;
  SolverRunReport solver;
  std::optional<IdentityReport> identity;
  std::optional<ScalingFit> fit;
  std::optional<OdiBound> odi;
  std::optional<RunOutcome> expected_outcome;
  bool expectation_matched = true;
  std::filesystem::path out_dir;
  nlohmann::ordered_json report;
};

inline RadialGrid make_grid(const ExperimentConfig& cfg, double eta) {
  if (cfg.grid.grading == 0.0)
    return RadialGrid::graded_for_scale(cfg.model.n, cfg.model.R, cfg.grid.cells,
                                        eta, cfg.grid.resolve_factor);
  if (cfg.grid.grading == 1.0)
    return RadialGrid::uniform(cfg.model.n, cfg.model.R, cfg.grid.cells);
  return RadialGrid::geometric(cfg.model.n, cfg.model.R, cfg.grid.cells,
                               cfg.grid.grading);
}

inline SolverConfig make_solver_config(const ExperimentConfig& cfg,
                                       const InitialDataSpec& spec) {
  SolverConfig sc;
  sc.cfl_safety = cfg.solver.cfl_safety;
  sc.dt_min = cfg.solver.dt_min;
  sc.u_blowup_threshold = cfg.solver.u_blowup_threshold;
  sc.t_end = cfg.solver.t_end;
  sc.chemotaxis_switch = cfg.solver.chemotaxis_switch;
  sc.clip_budget = cfg.solver.clip_budget;
  sc.monitor_alpha = cfg.solver.monitor_alpha.value_or(spec.alpha);
  sc.monitor_kappa =
      cfg.solver.monitor_kappa.value_or((cfg.model.n - spec.p) / spec.p);
  return sc;
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const SolverRunReport& rep, double s0) {
  CsvWriter csv(path);
  csv.metadata(std::string(kVersion));
  csv.metadata("s0 = " + format_double(s0) +
               " (absolute F values depend on the G anchor)");
  csv.header({"t", "mass_u", "mass_v", "sup_u", "sup_v", "F", "D", "F_grad",
              "F_v2", "F_uv", "F_G", "env_u", "env_v", "dt"});
  for (std::size_t k = 0; k < rep.trace.size(); ++k) {
    const EnergyRecord& r = rep.trace[k];
    const StepStats& s = rep.stats[k];
    csv.row({r.t, r.mass_u, r.mass_v, s.sup_u, s.sup_v, r.F, r.D, r.term_grad,
             r.term_v2, r.term_uv, r.term_G, s.env_u, s.env_v, s.dt});
  }
}

inline void write_snapshot_csv(const std::filesystem::path& path,
                               const StateSnapshot& s) {
  CsvWriter csv(path);
  csv.metadata("t = " + format_double(s.t));
  csv.header({"r", "u", "v"});
  const RadialGrid& g = s.grid();
  for (std::size_t i = 0; i < g.cells(); ++i)
    csv.row({g.centers[i], s.u[i], s.v[i]});
}

/// classify -> choose parameters -> build data -> simulate -> energy post-pass,
/// writing trace.csv, snapshots/ and report.json under the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const RunOptions& opts = {}) {
  const MotilityModel model = cfg.make_model();
  ExperimentResult res;
  res.verdict = classify_model(cfg);

  if (!opts.force &&
      (res.verdict.regime == Regime::GB || res.verdict.regime == Regime::IFTBU))
    throw PipelineRefusal(
        std::string("classifier verdict is ") + to_string(res.verdict.regime) +
        ": this parameter point cannot blow up in finite time; pass --force "
        "to simulate it anyway");

  std::optional<AdmissibilityCertificate> cert;
  if (cfg.model.certify) cert = certify_admissibility(model, 1e6, 400);
  const InitialDataSpec base =
      choose_parameters(model, cfg.initdata.mass, cert, cfg.initdata.overrides);
  const double eta = cfg.initdata.eta.value_or(base.eta0 / 4.0);
  res.spec = base.with_eta(eta);

  switch (res.verdict.regime) {
    case Regime::FTBU:
      res.expected_outcome = RunOutcome::blowup_detected;
      break;
    case Regime::GB:
    case Regime::IFTBU:
      res.expected_outcome = RunOutcome::completed;
      break;
    case Regime::UNKNOWN:
      break;
  }

  res.out_dir = opts.out_dir_override.empty()
                    ? std::filesystem::path(cfg.outputs.dir)
                    : std::filesystem::path(opts.out_dir_override);
  std::filesystem::create_directories(res.out_dir);

  nlohmann::ordered_json rep;
  rep["version"] = kVersion;
  rep["classification"] = detail::verdict_to_json(res.verdict);
  rep["initdata"] = detail::spec_to_json(res.spec);
  if (cert) {
    rep["certificate"] = {{"theta", cert->theta},
                          {"a", cert->a},
                          {"Mmq", cert->Mmq},
                          {"cond_2_3", cert->cond_2_3},
                          {"max_residual", cert->max_residual}};
    if (cert->b) rep["certificate"]["b"] = *cert->b;
    if (cert->vartheta) rep["certificate"]["vartheta"] = *cert->vartheta;
    if (cert->K) rep["certificate"]["K"] = *cert->K;
  }

  if (opts.dry_run) {
    rep["dry_run"] = true;
    rep["config_echo"] = detail::config_to_json(cfg);
    res.report = rep;
    write_text_file(res.out_dir / "report.json", rep.dump(2) + "\n");
    return res;
  }

  const RadialGrid grid = make_grid(cfg, eta);
  const SolverConfig sc = make_solver_config(cfg, res.spec);
  StateSnapshot state(0.0, build_u0(res.spec, grid), build_v0(res.spec, grid));

  RunCallbacks cb;
  cb.record_stride = std::max<std::size_t>(1, cfg.outputs.trace_stride);
  cb.snapshot_stride = cfg.outputs.snapshot_stride;
  std::size_t snap_index = 0;
  std::filesystem::path snap_dir = res.out_dir / "snapshots";
  if (cb.snapshot_stride) {
    std::filesystem::create_directories(snap_dir);
    cb.on_snapshot = [&](const StateSnapshot& s) {
      char name[32];
      std::snprintf(name, sizeof(name), "snap_%06zu.csv", snap_index++);
      write_snapshot_csv(snap_dir / name, s);
    };
  }

  res.solver = run(state, model, sc, cb);
  res.simulated = true;
  if (res.expected_outcome)
    res.expectation_matched = (res.solver.outcome == *res.expected_outcome);

  if (res.solver.trace.size() >= 3)
    res.identity = verify_energy_identity(res.solver.trace);
  res.fit = fit_F_D_scaling(res.solver.trace, cfg.model.n);
  const double F0 = res.solver.trace.front().F;
  if (res.fit)
    res.odi = odi_blowup_bound(F0, {res.fit->c1_hat, std::clamp(res.fit->gamma_hat,
                                                                1e-6, 1.0 - 1e-6)});

  rep["outcome"] = to_string(res.solver.outcome);
  rep["t_final"] = res.solver.t_final;
  rep["steps"] = res.solver.steps;
  rep["peaks"] = {{"sup_u", res.solver.peak_sup_u},
                  {"sup_v", res.solver.peak_sup_v}};
  // empirical envelope constants of the pointwise bounds r^alpha u <= A,
  // r^kappa v <= B over the whole run
  rep["envelope_constants"] = {{"A", res.solver.peak_env_u},
                               {"B", res.solver.peak_env_v},
                               {"alpha", sc.monitor_alpha},
                               {"kappa", sc.monitor_kappa}};
  rep["clip_count"] = res.solver.clip_count;
  rep["energy"] = {{"F0", F0},
                   {"F_final", res.solver.trace.back().F},
                   {"s0", model.s0()}};
  if (res.identity) {
    rep["energy"]["identity_median_residual"] = res.identity->median_residual;
    rep["energy"]["identity_max_residual"] = res.identity->max_residual;
    rep["energy"]["identity_pass"] = res.identity->pass;
  }
  nlohmann::ordered_json odi;
  odi["F0"] = F0;
  if (res.fit) {
    odi["c1_hat"] = res.fit->c1_hat;
    odi["gamma_hat"] = res.fit->gamma_hat;
    odi["fit_points"] = res.fit->points;
    odi["fit_rms_log_residual"] = res.fit->rms_log_residual;
    odi["gamma_floor"] = res.fit->gamma_floor;
  } else {
    odi["c1_hat"] = nullptr;
    odi["gamma_hat"] = nullptr;
  }
  if (res.odi) {
    odi["T_bound"] = res.odi->T_bound;
  } else {
    odi["T_bound"] = nullptr;
  }
  if (res.solver.outcome == RunOutcome::blowup_detected ||
      res.solver.outcome == RunOutcome::dt_underflow)
    odi["t_detect"] = res.solver.t_final;
  else
    odi["t_detect"] = nullptr;
  rep["odi"] = odi;
  if (res.expected_outcome) {
    rep["expectation"] = {{"expected", to_string(*res.expected_outcome)},
                          {"matched", res.expectation_matched}};
  }
  rep["grid"] = {{"n", grid.n},
                 {"R", grid.R},
                 {"cells", grid.cells()},
                 {"h_min", grid.h_min()},
                 {"stretch", grid.stretch}};
  rep["config_echo"] = detail::config_to_json(cfg);
  res.report = rep;

  write_trace_csv(res.out_dir / "trace.csv", res.solver, model.s0());
  write_text_file(res.out_dir / "report.json", rep.dump(2) + "\n");
  return res;
}

struct SweepRow {
  double eta = 0.0;
  EnergyRecord record;
  FamilyNorms norms;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool diverges = false;
  InitialDataSpec spec;
};

/// Builds the eta-family, evaluates its energy (split into summands) and the
/// uniform-bound norms, and writes the table. Family members are independent;
/// they are evaluated in parallel and merged in eta order.
inline SweepResult sweep_eta(const ExperimentConfig& cfg,
                             const RunOptions& opts = {}) {
  const MotilityModel model = cfg.make_model();
  std::optional<AdmissibilityCertificate> cert;
  if (cfg.model.certify) cert = certify_admissibility(model, 1e6, 400);
  SweepResult out;
  out.spec =
      choose_parameters(model, cfg.initdata.mass, cert, cfg.initdata.overrides);

  std::vector<double> etas;
  for (int k = 1; k <= cfg.initdata.halvings; ++k)
    etas.push_back(out.spec.eta0 / std::pow(2.0, k));
  const RadialGrid grid = make_grid(cfg, etas.back());

  out.rows.resize(etas.size());
  detail::parallel_for(etas.size(), opts.workers, [&](std::size_t i) {
    const auto se = out.spec.with_eta(etas[i]);
    StateSnapshot s(0.0, build_u0(se, grid), build_v0(se, grid));
    out.rows[i].eta = etas[i];
    out.rows[i].record = compute_F(s, model);
  });
  const auto bounds = verify_uniform_bounds(out.spec, grid, etas, false);
  for (std::size_t i = 0; i < etas.size(); ++i)
    out.rows[i].norms = bounds.per_eta[i];

  std::vector<FamilyEnergy> fam;
  for (const auto& r : out.rows) fam.push_back({r.eta, r.record});
  out.diverges = family_energy_diverges(fam);

  if (!opts.out_dir_override.empty() || !cfg.outputs.dir.empty()) {
    const std::filesystem::path dir = opts.out_dir_override.empty()
                                          ? cfg.outputs.dir
                                          : opts.out_dir_override;
    std::filesystem::create_directories(dir);
    CsvWriter csv(dir / "eta_sweep.csv");
    csv.metadata(std::string(kVersion));
    csv.metadata("energy of the concentrating family versus eta");
    csv.metadata(std::string("diverges = ") + (out.diverges ? "true" : "false"));
    csv.header({"eta", "F", "F_grad", "F_v2", "F_uv", "F_G", "mass_u", "mass_v",
                "sup_ralpha_u", "v_w1p", "rbeta_v_w1inf"});
    for (const auto& r : out.rows)
      csv.row({r.eta, r.record.F, r.record.term_grad, r.record.term_v2,
               r.record.term_uv, r.record.term_G, r.record.mass_u,
               r.record.mass_v, r.norms.sup_ralpha_u, r.norms.v_w1p,
               r.norms.rbeta_v_w1inf});
  }
  return out;
}

/// Writes the regime map as CSV rows (m, q, regime), m varying fastest.
inline RegimeGrid write_region_scan(int n, std::pair<double, double> m_range,
                                    std::pair<double, double> q_range,
                                    int resolution,
                                    const std::filesystem::path& out,
                                    unsigned workers = 0) {
  RegimeGrid grid;
  grid.n = n;
  grid.m_values.resize(resolution);
  grid.q_values.resize(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double t = double(i) / (resolution - 1);
    grid.m_values[i] = m_range.first + t * (m_range.second - m_range.first);
    grid.q_values[i] = q_range.first + t * (q_range.second - q_range.first);
  }
  grid.verdicts.resize(std::size_t(resolution) * resolution);
  detail::parallel_for(resolution, workers, [&](std::size_t iq) {
    for (int im = 0; im < resolution; ++im)
      grid.verdicts[iq * resolution + im] =
          classify(n, grid.m_values[im], grid.q_values[iq]);
  });

  if (!out.empty()) {
    if (out.has_parent_path())
      std::filesystem::create_directories(out.parent_path());
    CsvWriter csv(out);
    csv.metadata(std::string(kVersion));
    csv.metadata("n = " + std::to_string(n));
    csv.header({"m", "q", "regime"});
    for (int iq = 0; iq < resolution; ++iq)
      for (int im = 0; im < resolution; ++im)
        csv.row_mixed({format_double(grid.m_values[im]),
                       format_double(grid.q_values[iq]),
                       to_string(grid.verdicts[iq * resolution + im].regime)});
  }
  return grid;
}

struct RefinementLevel {
  std::size_t cells = 0;
  double cfl = 0.0;
  double mass_residual = 0.0;      // |mass(t_final) - mass(0)| / mass(0)
  double identity_median = 0.0;
  double t_final = 0.0;
  RunOutcome outcome = RunOutcome::completed;
};

struct RefinementStudy {
  std::vector<RefinementLevel> levels;
  std::vector<double> order_mass;      // observed orders between levels
  std::vector<double> order_identity;
  std::vector<double> blowup_shift;    // |t_final(l+1) - t_final(l)|
};

/// Reruns the experiment with cells x2 and dt-scale /2 per level and reports
/// observed orders for the mass residual and the energy-identity residual,
/// plus the shift of the detected stopping time.
inline RefinementStudy refinement_study(const ExperimentConfig& cfg, int levels,
                                        const RunOptions& opts = {}) {
  if (levels < 2)
    throw std::invalid_argument("refinement_study: need levels >= 2");
  RefinementStudy study;
  for (int l = 0; l < levels; ++l) {
    ExperimentConfig c = cfg;
    c.grid.cells = cfg.grid.cells << l;
    c.solver.cfl_safety = cfg.solver.cfl_safety / std::pow(2.0, l);
    c.outputs.snapshot_stride = 0;
    RunOptions ro = opts;
    ro.out_dir_override = (std::filesystem::path(opts.out_dir_override.empty()
                                                     ? cfg.outputs.dir
                                                     : opts.out_dir_override) /
                           ("level_" + std::to_string(l)))
                              .string();
    const auto res = run_experiment(c, ro);
    RefinementLevel lev;
    lev.cells = c.grid.cells;
    lev.cfl = c.solver.cfl_safety;
    const double m0 = res.solver.trace.front().mass_u;
    lev.mass_residual = std::abs(res.solver.trace.back().mass_u - m0) /
                        std::max(std::abs(m0), 1e-300);
    lev.identity_median = res.identity ? res.identity->median_residual : 0.0;
    lev.t_final = res.solver.t_final;
    lev.outcome = res.solver.outcome;
    study.levels.push_back(lev);
  }
  const auto order = [](double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0)) return 0.0;
    return std::log2(coarse / fine);
  };
  for (std::size_t l = 0; l + 1 < study.levels.size(); ++l) {
    study.order_mass.push_back(
        order(study.levels[l].mass_residual, study.levels[l + 1].mass_residual));
    study.order_identity.push_back(order(study.levels[l].identity_median,
                                         study.levels[l + 1].identity_median));
    study.blowup_shift.push_back(
        std::abs(study.levels[l + 1].t_final - study.levels[l].t_final));
  }

  const std::filesystem::path dir =
      opts.out_dir_override.empty() ? cfg.outputs.dir : opts.out_dir_override;
  std::filesystem::create_directories(dir);
  CsvWriter csv(dir / "refinement.csv");
  csv.metadata(std::string(kVersion));
  csv.header({"level", "cells", "cfl", "mass_residual", "identity_median",
              "t_final", "order_mass", "order_identity", "blowup_shift"});
  for (std::size_t l = 0; l < study.levels.size(); ++l) {
    const auto& lev = study.levels[l];
    std::vector<std::string> row = {
        std::to_string(l),
        std::to_string(lev.cells),
        format_double(lev.cfl),
        format_double(lev.mass_residual),
        format_double(lev.identity_median),
        format_double(lev.t_final)};
    if (l > 0) {
      row.push_back(format_double(study.order_mass[l - 1]));
      row.push_back(format_double(study.order_identity[l - 1]));
      row.push_back(format_double(study.blowup_shift[l - 1]));
    } else {
      row.insert(row.end(), {"", "", ""});
    }
    csv.row_mixed(row);
  }
  return study;
}

/// Recomputes F and D from stored snapshot CSVs (r, u, v) under
/// <run_dir>/snapshots, using the grid implied by the config.
inline std::vector<EnergyRecord> recompute_energy(
    const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
    const std::filesystem::path& out_csv = {}) {
  const MotilityModel model = cfg.make_model();
  std::optional<AdmissibilityCertificate> cert;
  const InitialDataSpec base = choose_parameters(model, cfg.initdata.mass, cert,
                                                 cfg.initdata.overrides);
  const double eta = cfg.initdata.eta.value_or(base.eta0 / 4.0);
  const RadialGrid grid = make_grid(cfg, eta);

  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::directory_iterator(run_dir / "snapshots"))
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no snapshot CSVs under " +
                             (run_dir / "snapshots").string());

  const auto snapshot_time = [](const std::filesystem::path& f) {
    std::ifstream in(f);
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
      const auto pos = line.find("t = ");
      if (pos != std::string::npos) return std::stod(line.substr(pos + 4));
    }
    return 0.0;
  };

  std::vector<EnergyRecord> records;
  for (const auto& f : files) {
    const CsvTable table = read_csv(f);
    if (table.rows.size() != grid.cells())
      throw std::runtime_error("snapshot " + f.string() +
                               " does not match the configured grid");
    StateSnapshot s(snapshot_time(f), RadialField(grid), RadialField(grid));
    const std::size_t cu = table.column("u"), cv = table.column("v");
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      s.u[i] = table.rows[i][cu];
      s.v[i] = table.rows[i][cv];
    }
    records.push_back(compute_record(s, model));
  }
  if (!out_csv.empty()) {
    CsvWriter csv(out_csv);
    csv.metadata(std::string(kVersion));
    csv.metadata("energy recomputed from stored snapshots");
    csv.header({"t", "F", "D", "F_grad", "F_v2", "F_uv", "F_G", "mass_u",
                "mass_v"});
    for (const auto& r : records)
      csv.row({r.t, r.F, r.D, r.term_grad, r.term_v2, r.term_uv, r.term_G,
               r.mass_u, r.mass_v});
  }
  return records;
}

}  // namespace kslab
