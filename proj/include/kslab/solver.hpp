#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kslab/energetics.hpp"
#include "kslab/motility.hpp"
#include "kslab/state.hpp"

namespace kslab {

struct SolverConfig {
  double cfl_safety = 0.9;
  double dt_min = 1e-13;
  double u_blowup_threshold = 1e8;
  double t_end = 1.0;
  double monitor_alpha = 1.0;        // exponent of the r^alpha u envelope
  double monitor_kappa = 1.0;        // exponent of the r^kappa v envelope
  double chemotaxis_switch = 1.0;    // test scaffolding multiplier on psi
  long clip_budget = 1000000;        // clipped cells*steps before giving up

  void validate() const {
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
      throw std::invalid_argument("SolverConfig: cfl_safety must lie in (0, 1]");
    if (!(dt_min > 0.0) || !(u_blowup_threshold > 0.0))
      throw std::invalid_argument("SolverConfig: thresholds must be positive");
    if (!(t_end >= 0.0))
      throw std::invalid_argument("SolverConfig: t_end must be >= 0");
    if (!(chemotaxis_switch >= 0.0 && chemotaxis_switch <= 1.0))
      throw std::invalid_argument("SolverConfig: chemotaxis_switch must lie in [0, 1]");
  }
};

enum class RunOutcome { completed, blowup_detected, dt_underflow };

inline const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::completed: return "completed";
    case RunOutcome::blowup_detected: return "blowup_detected";
    case RunOutcome::dt_underflow: return "dt_underflow";
  }
  return "?";
}

class DtUnderflowError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ClipBudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Discrete suprema of r^alpha u and r^kappa v over the cells.
inline std::pair<double, double> envelope_monitor(const StateSnapshot& s,
                                                  double alpha, double kappa) {
  if (!(alpha > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("envelope_monitor: exponents must be positive");
  const RadialGrid& g = s.grid();
  double eu = 0.0, ev = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    eu = std::max(eu, std::pow(g.centers[i], alpha) * s.u[i]);
    ev = std::max(ev, std::pow(g.centers[i], kappa) * s.v[i]);
  }
  return {eu, ev};
}

/// Explicit flux-form integrator for the radial system
///   u_t = r^(1-n) (r^(n-1) [phi(u) u_r - psi(u) v_r])_r,
///   v_t = r^(1-n) (r^(n-1) v_r)_r - v + u,
/// with zero total flux at r = 0 (symmetry) and r = R (Neumann).
/// Face diffusivity is the arithmetic mean of cell values of phi(u);
/// the chemotactic flux upwinds psi(u) by the sign of -v_r. The update
/// telescopes, so the discrete mass of u is conserved to roundoff.
///
/// Holds per-step work buffers; a single Stepper drives one run.
class Stepper {
public:
  Stepper(const RadialGrid& grid, const MotilityModel& model,
          const SolverConfig& cfg)
      : g_(grid), model_(model), cfg_(cfg) {
    cfg.validate();
    const std::size_t N = g_.cells();
    phi_c_.resize(N);
    psi_c_.resize(N);
    pos_c_.resize(N);
    flux_u_.assign(N + 1, 0.0);
    flux_v_.assign(N + 1, 0.0);
    denom_u_.resize(N);
    denom_v_.resize(N);
    ralpha_.resize(N);
    rkappa_.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      ralpha_[i] = std::pow(g_.centers[i], cfg.monitor_alpha);
      rkappa_[i] = std::pow(g_.centers[i], cfg.monitor_kappa);
    }
  }

  /// Fluxes and the stable dt for the current fields. Must be called before
  /// apply(); the fluxes are cached between the two.
  double stable_dt(const RadialField& u, const RadialField& v) {
    const std::size_t N = g_.cells();
    const double sw = cfg_.chemotaxis_switch;
    for (std::size_t i = 0; i < N; ++i) {
      phi_c_[i] = model_.eval_phi(u[i]);
      psi_c_[i] = model_.eval_psi(u[i]);
      pos_c_[i] = model_.psi_over_s(u[i]);
    }
    std::fill(denom_u_.begin(), denom_u_.end(), 0.0);
    std::fill(denom_v_.begin(), denom_v_.end(), 0.0);
    for (std::size_t f = 1; f < N; ++f) {
      const std::size_t j = f - 1;
      const double inv_gap = 1.0 / g_.center_gaps[j];
      const double du = (u[j + 1] - u[j]) * inv_gap;
      const double dv = (v[j + 1] - v[j]) * inv_gap;
      const double phif = 0.5 * (phi_c_[j] + phi_c_[j + 1]);
      const std::size_t donor = (dv < 0.0) ? j + 1 : j;
      const double A = g_.face_areas[f];
      flux_u_[f] = A * (phif * du - sw * psi_c_[donor] * dv);
      flux_v_[f] = A * dv;
      const double drift = sw * pos_c_[donor] * std::abs(dv);
      const double diff = A * (phif * inv_gap + drift);
      denom_u_[j] += diff;
      denom_u_[j + 1] += diff;
      denom_v_[j] += A * inv_gap;
      denom_v_[j + 1] += A * inv_gap;
    }
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < N; ++i) {
      if (denom_u_[i] > 0.0) dt = std::min(dt, g_.volumes[i] / denom_u_[i]);
      dt = std::min(dt, g_.volumes[i] / (denom_v_[i] + g_.volumes[i]));
    }
    return cfg_.cfl_safety * dt;
  }

  /// Applies one Euler step of size dt using the cached fluxes. Returns the
  /// number of cells clipped for negativity (counted when the undershoot
  /// exceeds 1e-12; clips are mass-compensated within the step).
  long apply(RadialField& u, RadialField& v, double dt) {
    const std::size_t N = g_.cells();
    long clips = 0;
    double clipped_mass = 0.0;
    double positive_mass = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double div_u = (flux_u_[i + 1] - flux_u_[i]) / g_.volumes[i];
      const double div_v = (flux_v_[i + 1] - flux_v_[i]) / g_.volumes[i];
      const double v_new = v[i] + dt * (div_v - v[i] + u[i]);
      double u_new = u[i] + dt * div_u;
      if (u_new < 0.0) {
        if (u_new < -1e-12) ++clips;
        clipped_mass += -u_new * g_.volumes[i];
        u_new = 0.0;
      } else {
        positive_mass += u_new * g_.volumes[i];
      }
      u[i] = u_new;
      v[i] = std::max(v_new, 0.0);
    }
    if (clipped_mass > 0.0 && positive_mass > 0.0) {
      const double shrink = 1.0 - clipped_mass / positive_mass;
      for (std::size_t i = 0; i < N; ++i) u[i] *= shrink;
    }
    return clips;
  }

  const std::vector<double>& ralpha() const { return ralpha_; }
  const std::vector<double>& rkappa() const { return rkappa_; }

private:
  const RadialGrid& g_;
  const MotilityModel& model_;
  SolverConfig cfg_;
  std::vector<double> phi_c_, psi_c_, pos_c_;
  std::vector<double> flux_u_, flux_v_;
  std::vector<double> denom_u_, denom_v_;
  std::vector<double> ralpha_, rkappa_;
};

/// One adaptive explicit step. Throws DtUnderflowError when the stable dt
/// falls below the configured floor (a numerical blow-up signal).
inline StateSnapshot step(const StateSnapshot& state, const MotilityModel& model,
                          const SolverConfig& cfg) {
  Stepper st(state.grid(), model, cfg);
  StateSnapshot next = state;
  const double dt = st.stable_dt(next.u, next.v);
  if (dt < cfg.dt_min)
    throw DtUnderflowError("stable dt underflowed the configured floor");
  st.apply(next.u, next.v, dt);
  next.t = state.t + dt;
  return next;
}

struct RunCallbacks {
  std::size_t record_stride = 1;    // energy records every k-th step
  std::size_t snapshot_stride = 0;  // 0 disables snapshots
  std::function<void(const StateSnapshot&)> on_snapshot;
};

/// Solver-side numbers accompanying each energy record.
struct StepStats {
  double t = 0.0;
  double sup_u = 0.0;
  double sup_v = 0.0;
  double env_u = 0.0;  // sup_i r_i^alpha u_i
  double env_v = 0.0;  // sup_i r_i^kappa v_i
  double dt = 0.0;
};

struct SolverRunReport {
  RunOutcome outcome = RunOutcome::completed;
  double t_final = 0.0;
  unsigned long steps = 0;
  double dt_last = 0.0;
  double peak_sup_u = 0.0;
  double peak_sup_v = 0.0;
  double peak_env_u = 0.0;  // running max of sup_i r_i^alpha u_i
  double peak_env_v = 0.0;  // running max of sup_i r_i^kappa v_i
  long clip_count = 0;
  std::vector<EnergyRecord> trace;
  std::vector<StepStats> stats;  // aligned with trace
  StateSnapshot final_state;
};

/// Integrates until t_end, a blow-up threshold crossing, or dt underflow.
inline SolverRunReport run(const StateSnapshot& initial, const MotilityModel& model,
                           const SolverConfig& cfg, const RunCallbacks& cb = {}) {
  cfg.validate();
  const RadialGrid& g = initial.grid();
  const std::size_t N = g.cells();
  Stepper st(g, model, cfg);
  StateSnapshot state = initial;

  SolverRunReport rep;
  StepStats cur;
  const auto scan_state = [&]() {
    double su = 0.0, sv = 0.0, eu = 0.0, ev = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      su = std::max(su, state.u[i]);
      sv = std::max(sv, state.v[i]);
      eu = std::max(eu, st.ralpha()[i] * state.u[i]);
      ev = std::max(ev, st.rkappa()[i] * state.v[i]);
    }
    rep.peak_sup_u = std::max(rep.peak_sup_u, su);
    rep.peak_sup_v = std::max(rep.peak_sup_v, sv);
    rep.peak_env_u = std::max(rep.peak_env_u, eu);
    rep.peak_env_v = std::max(rep.peak_env_v, ev);
    cur = {state.t, su, sv, eu, ev, rep.dt_last};
    return su;
  };
  const auto record = [&]() {
    rep.trace.push_back(compute_record(state, model));
    rep.stats.push_back(cur);
  };

  scan_state();
  record();
  if (cb.on_snapshot && cb.snapshot_stride) cb.on_snapshot(state);

  bool recorded_last = true;
  while (state.t < cfg.t_end) {
    const double dt_stable = st.stable_dt(state.u, state.v);
    if (dt_stable < cfg.dt_min) {
      rep.outcome = RunOutcome::dt_underflow;
      break;
    }
    const double dt = std::min(dt_stable, cfg.t_end - state.t);
    rep.clip_count += st.apply(state.u, state.v, dt);
    if (rep.clip_count > cfg.clip_budget)
      throw ClipBudgetError("negativity clip budget exhausted");
    state.t += dt;
    ++rep.steps;
    rep.dt_last = dt;

    const double sup_u = scan_state();
    recorded_last = false;
    if (cb.record_stride && rep.steps % cb.record_stride == 0) {
      record();
      recorded_last = true;
    }
    if (cb.on_snapshot && cb.snapshot_stride && rep.steps % cb.snapshot_stride == 0)
      cb.on_snapshot(state);
    if (sup_u >= cfg.u_blowup_threshold) {
      rep.outcome = RunOutcome::blowup_detected;
      break;
    }
  }
  if (!recorded_last) record();
  rep.t_final = state.t;
  rep.final_state = std::move(state);
  return rep;
}

}  // namespace kslab
