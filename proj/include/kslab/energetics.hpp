#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kslab/motility.hpp"
#include "kslab/state.hpp"

namespace kslab {

/// One row of the simulation trace: the energy
///   F = 1/2 int |grad v|^2 + 1/2 int v^2 - int u v + int G(u)
/// split into its four summands, the dissipation
///   D = int f^2 + int g^2,  f = Lap v - v + u,
///   g = phi(u)/sqrt(psi(u)) u_r - sqrt(psi(u)) v_r,
/// and the masses of both fields.
struct EnergyRecord {
  double t = 0.0;
  double F = 0.0;
  double D = 0.0;
  double term_grad = 0.0;  //  1/2 int |grad v|^2
  double term_v2 = 0.0;    //  1/2 int v^2
  double term_uv = 0.0;    // -int u v
  double term_G = 0.0;     //  int G(u)
  double mass_u = 0.0;
  double mass_v = 0.0;
};

namespace detail {

/// Discrete radial Laplacian with zero-flux faces at r = 0 and r = R.
inline void laplacian(const RadialField& v, std::vector<double>& out) {
  const RadialGrid& g = *v.grid;
  const std::size_t N = g.cells();
  out.assign(N, 0.0);
  double flux_in = 0.0;  // A_f * dv/dr at the inner face (zero at r = 0)
  for (std::size_t i = 0; i < N; ++i) {
    double flux_out = 0.0;
    if (i + 1 < N)
      flux_out = g.face_areas[i + 1] * (v[i + 1] - v[i]) / g.center_gaps[i];
    out[i] = (flux_out - flux_in) / g.volumes[i];
    flux_in = flux_out;
  }
}

/// g on interior faces (index f = 1..N-1 maps to slot f-1), built from face
/// gradients and cell-averaged coefficient factors, with psi floored at
/// psi(1e-30) so exact zeros of u cannot produce a 0/0.
inline void g_on_faces(const StateSnapshot& s, const MotilityModel& model,
                       std::vector<double>& out, long* regularized = nullptr) {
  const RadialGrid& g = *s.u.grid;
  const std::size_t N = g.cells();
  out.assign(N >= 1 ? N - 1 : 0, 0.0);
  const double psi_floor = model.eval_psi(1e-30);
  for (std::size_t f = 0; f + 1 < N; ++f) {
    const double du = (s.u[f + 1] - s.u[f]) / g.center_gaps[f];
    const double dv = (s.v[f + 1] - s.v[f]) / g.center_gaps[f];
    const double phi = 0.5 * (model.eval_phi(s.u[f]) + model.eval_phi(s.u[f + 1]));
    double psi = 0.5 * (model.eval_psi(s.u[f]) + model.eval_psi(s.u[f + 1]));
    if (psi < psi_floor) {
      psi = psi_floor;
      if (regularized) ++*regularized;
    }
    const double sq = std::sqrt(psi);
    out[f] = phi * du / sq - sq * dv;
  }
}

/// Quadrature weight of an interior face: area times center gap.
inline double face_weight(const RadialGrid& g, std::size_t f) {
  return g.face_areas[f + 1] * g.center_gaps[f];
}

}  // namespace detail

/// f = Lap v - v + u at cells and g averaged onto cells from its face values
/// (zero-flux boundary faces contribute zero).
inline std::pair<RadialField, RadialField> compute_fields(
    const StateSnapshot& s, const MotilityModel& model) {
  const RadialGrid& g = *s.u.grid;
  const std::size_t N = g.cells();
  RadialField f(g), gc(g);
  std::vector<double> lap;
  detail::laplacian(s.v, lap);
  for (std::size_t i = 0; i < N; ++i) f[i] = lap[i] - s.v[i] + s.u[i];
  std::vector<double> gf;
  detail::g_on_faces(s, model, gf);
  for (std::size_t i = 0; i < N; ++i) {
    const double inner = (i == 0) ? 0.0 : gf[i - 1];
    const double outer = (i + 1 == N) ? 0.0 : gf[i];
    gc[i] = 0.5 * (inner + outer);
  }
  return {std::move(f), std::move(gc)};
}

/// Energy and its four summands; D is left NaN (see compute_record).
/// |grad v|^2 integrates face-gradient squares against face-adjacent
/// volumes, which keeps the discrete integration by parts against the
/// Laplacian in f exact.
inline EnergyRecord compute_F(const StateSnapshot& s, const MotilityModel& model) {
  const RadialGrid& g = *s.u.grid;
  const std::size_t N = g.cells();
  EnergyRecord rec;
  rec.t = s.t;
  for (std::size_t f = 0; f + 1 < N; ++f) {
    const double dv = (s.v[f + 1] - s.v[f]) / g.center_gaps[f];
    rec.term_grad += 0.5 * detail::face_weight(g, f) * dv * dv;
  }
  for (std::size_t i = 0; i < N; ++i) {
    const double V = g.volumes[i];
    rec.term_v2 += 0.5 * V * s.v[i] * s.v[i];
    rec.term_uv -= V * s.u[i] * s.v[i];
    rec.term_G += V * model.eval_G(s.u[i]);
    rec.mass_u += V * s.u[i];
    rec.mass_v += V * s.v[i];
  }
  rec.F = rec.term_grad + rec.term_v2 + rec.term_uv + rec.term_G;
  rec.D = std::numeric_limits<double>::quiet_NaN();
  return rec;
}

inline double compute_D(const StateSnapshot& s, const MotilityModel& model) {
  const RadialGrid& g = *s.u.grid;
  const std::size_t N = g.cells();
  std::vector<double> lap, gf;
  detail::laplacian(s.v, lap);
  detail::g_on_faces(s, model, gf);
  double D = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double fi = lap[i] - s.v[i] + s.u[i];
    D += g.volumes[i] * fi * fi;
  }
  for (std::size_t f = 0; f + 1 < N; ++f)
    D += detail::face_weight(g, f) * gf[f] * gf[f];
  return D;
}

inline EnergyRecord compute_record(const StateSnapshot& s,
                                   const MotilityModel& model) {
  EnergyRecord rec = compute_F(s, model);
  rec.D = compute_D(s, model);
  return rec;
}

struct IdentityReport {
  std::size_t interior_records = 0;
  double median_residual = 0.0;
  double max_residual = 0.0;
  bool pass = false;  // median <= 0.05
};

/// Centered-difference check of dF/dt = -D along a trace; the residual is
/// |dF/dt + D| / (|D| + 1) at each interior record.
inline IdentityReport verify_energy_identity(const std::vector<EnergyRecord>& trace) {
  if (trace.size() < 3)
    throw std::invalid_argument(
        "verify_energy_identity: need at least 3 records");
  std::vector<double> res;
  res.reserve(trace.size() - 2);
  for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
    const double dt = trace[k + 1].t - trace[k - 1].t;
    if (!(dt > 0.0)) continue;
    const double dFdt = (trace[k + 1].F - trace[k - 1].F) / dt;
    res.push_back(std::abs(dFdt + trace[k].D) / (std::abs(trace[k].D) + 1.0));
  }
  IdentityReport rep;
  rep.interior_records = res.size();
  if (res.empty()) {
    rep.pass = true;  // constant-in-time trace: nothing to violate
    return rep;
  }
  std::vector<double> sorted = res;
  std::sort(sorted.begin(), sorted.end());
  rep.median_residual = sorted[sorted.size() / 2];
  rep.max_residual = sorted.back();
  rep.pass = rep.median_residual <= 0.05;
  return rep;
}

struct ScalingFit {
  double c1_hat = 0.0;
  double gamma_hat = 0.0;
  double rms_log_residual = 0.0;
  std::size_t points = 0;
  double gamma_floor = 0.0;  // (n+2)/(n+4), the theoretical reference line
};

/// Least-squares fit of log(-F) = gamma log D + log C over trace records
/// with -F > 2 and D > 1. Returns nothing when fewer than 10 records
/// qualify. Diagnostic only: the fitted constants are empirical stand-ins
/// for constants the theory does not provide numerically.
inline std::optional<ScalingFit> fit_F_D_scaling(
    const std::vector<EnergyRecord>& trace, int n = 2) {
  std::vector<double> x, y;
  for (const EnergyRecord& r : trace) {
    if (-r.F > 2.0 && r.D > 1.0) {
      x.push_back(std::log(r.D));
      y.push_back(std::log(-r.F));
    }
  }
  if (x.size() < 10) return std::nullopt;
  const std::size_t N = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < N; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = N * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  ScalingFit fit;
  fit.gamma_hat = (N * sxy - sx * sy) / denom;
  const double logc = (sy - fit.gamma_hat * sx) / N;
  fit.c1_hat = std::exp(logc);
  double ss = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = y[i] - fit.gamma_hat * x[i] - logc;
    ss += e * e;
  }
  fit.rms_log_residual = std::sqrt(ss / N);
  fit.points = N;
  fit.gamma_floor = double(n + 2) / (n + 4);
  return fit;
}

/// Constants of the energy-dissipation inequality F >= -c1 (D^gamma + 1).
struct OdiParams {
  double c1 = 1.0;
  double gamma = 0.5;

  void validate() const {
    if (!(c1 > 0.0)) throw std::invalid_argument("OdiParams: c1 must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0))
      throw std::invalid_argument("OdiParams: gamma must lie in (0, 1)");
  }
  double lambda() const { return (1.0 - gamma) / gamma; }
};

/// Blow-up time bound from the superlinear comparison argument: when the
/// initial energy satisfies F0 < -2 c1, no solution can outlive
///   T_bound = (2 c1)^(-lambda) / lambda,
/// and -F dominates the comparison curve ((2 c1)^(-lambda) - lambda t)^(-1/lambda).
struct OdiBound {
  double T_bound = 0.0;
  double c1 = 0.0;
  double lambda = 0.0;

  double curve(double t) const {
    const double base = std::pow(2.0 * c1, -lambda) - lambda * t;
    return std::pow(base, -1.0 / lambda);
  }
};

inline std::optional<OdiBound> odi_blowup_bound(double F0, const OdiParams& odi) {
  odi.validate();
  const double lam = odi.lambda();
  if (lam < 1e-9) return std::nullopt;  // bound degenerates as gamma -> 1
  if (!(F0 < -2.0 * odi.c1)) return std::nullopt;
  OdiBound b;
  b.c1 = odi.c1;
  b.lambda = lam;
  b.T_bound = std::pow(2.0 * odi.c1, -lam) / lam;
  return b;
}

}  // namespace kslab
