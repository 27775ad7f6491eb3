#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kslab/energetics.hpp"
#include "kslab/grid.hpp"
#include "kslab/motility.hpp"
#include "kslab/regime.hpp"
#include "kslab/state.hpp"

namespace kslab {

/// Parameters of the concentrating low-energy family
///   u_eta(x) = M_u a_eta (|x|^2 + eta^2)^(-alpha/2),
///   v_eta(x) = (ln(R/eta))^(-gamma) ln(2R^2/(|x|^2+eta^2))        (n = 2),
///   v_eta(x) = eta^(delta-gamma) (|x|^2 + eta^2)^(-delta/2)       (n >= 3),
/// with eta in (0, eta0), eta0 = min{1, R/2}. The exponents live in
///   p in (1, n/(n-1)),  beta in (n/p, n),
///   alpha in (n, inf) when M(m,q) >= 1, else in
///     (n beta / (n(m-q2)+1)_+ , 2/(1-M(m,q))),
///   gamma in (0, 1-theta) for n = 2, ((1-theta) n, n-2) for n >= 3,
///   delta > n+1 (n >= 3 only).
struct InitialDataSpec {
  double Mu = 1.0;
  double eta = 0.0;   // 0 = not set yet
  double eta0 = 0.0;
  double alpha = 0.0;
  double p = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::optional<double> delta;  // n >= 3 only
  double theta_used = 0.0;

  InitialDataSpec with_eta(double e) const {
    if (!(e > 0.0) || !(e < eta0))
      throw std::invalid_argument("InitialDataSpec: eta must lie in (0, eta0)");
    InitialDataSpec s = *this;
    s.eta = e;
    return s;
  }
};

struct InitDataOverrides {
  std::optional<double> alpha, beta, p, gamma, delta;
};

class InfeasibleParameters : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// theta of the G growth envelope when no certificate is available:
/// 1/2 for the planar cases, and for n >= 3 the midpoint of
/// (2/n, min{1, 1-(m-q2)}), the interval the prototype growth admits.
inline double fast_path_theta(const MotilityModel& model) {
  const ModelParams& p = model.params();
  if (model.kind() == MotilityKind::prototype_log) return 0.5;
  if (model.kind() == MotilityKind::custom)
    throw InfeasibleParameters(
        "custom models need an admissibility certificate to supply theta");
  if (p.n == 2) return 0.5;
  const double lo = 2.0 / p.n;
  const double hi = std::min(1.0, 1.0 - (p.m - p.q2));
  if (!(hi > lo))
    throw InfeasibleParameters(
        "empty theta interval (2/n, min{1, 1-(m-q2)}): parameters not supercritical");
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Midpoint parameter selection for the low-energy family. When the midpoint
/// beta empties the alpha interval, beta is lowered toward n/p by bisection
/// (and, as a last resort, p is raised toward n/(n-1)) until it opens; the
/// main parameter condition guarantees this terminates for genuine blow-up
/// points. Throws InfeasibleParameters otherwise.
inline InitialDataSpec choose_parameters(
    const MotilityModel& model, double Mu,
    const std::optional<AdmissibilityCertificate>& cert = std::nullopt,
    const InitDataOverrides& ov = {}) {
  const ModelParams& mp = model.params();
  const int n = mp.n;
  const double M = mp.Mmq();
  if (!(Mu > 0.0))
    throw std::invalid_argument("choose_parameters: Mu must be > 0");

  InitialDataSpec spec;
  spec.Mu = Mu;
  spec.eta0 = std::min(1.0, mp.R / 2.0);

  const double p_hi = double(n) / (n - 1);
  spec.p = ov.p ? *ov.p : 0.5 * (1.0 + p_hi);
  if (!(spec.p > 1.0 && spec.p < p_hi))
    throw std::invalid_argument("initdata: p must lie in (1, n/(n-1))");

  const auto alpha_interval = [&](double beta) -> std::pair<double, double> {
    if (M >= 1.0) return {double(n), std::numeric_limits<double>::infinity()};
    const double den = n * (mp.m - mp.q2) + 1.0;
    const double lower =
        den > 0.0 ? n * beta / den : std::numeric_limits<double>::infinity();
    return {lower, 2.0 / (1.0 - M)};
  };

  spec.beta = ov.beta ? *ov.beta : 0.5 * (double(n) / spec.p + n);
  if (!(spec.beta > double(n) / spec.p && spec.beta < n))
    throw std::invalid_argument("initdata: beta must lie in (n/p, n)");

  if (ov.alpha) {
    spec.alpha = *ov.alpha;
  } else if (M >= 1.0) {
    spec.alpha = n + 1.0;
  } else {
    // feasibility search: shrink beta toward n/p, then p toward n/(n-1);
    // the interval must open by a real margin, not by rounding slack
    const auto open = [](double lo, double hi) {
      return hi - lo > 1e-9 * std::max(1.0, std::abs(hi));
    };
    if (!ov.beta) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const auto [lo, hi] = alpha_interval(spec.beta);
        if (open(lo, hi)) break;
        const double beta_floor = double(n) / spec.p;
        if (spec.beta - beta_floor < 1e-9) {
          if (ov.p || p_hi - spec.p < 1e-9)
            throw InfeasibleParameters(
                "empty alpha interval: parameter point admits no feasible (p, beta, alpha)");
          spec.p = 0.5 * (spec.p + p_hi);
          spec.beta = 0.5 * (double(n) / spec.p + n);
        } else {
          spec.beta = 0.5 * (beta_floor + spec.beta);
        }
      }
    }
    const auto [lo, hi] = alpha_interval(spec.beta);
    if (!open(lo, hi))
      throw InfeasibleParameters(
          "empty alpha interval (n beta/(n(m-q2)+1)_+, 2/(1-M)): "
          "parameter point is not in the blow-up regime");
    spec.alpha = 0.5 * (lo + hi);
  }
  {
    const auto [lo, hi] = alpha_interval(spec.beta);
    if (!(spec.alpha > lo && spec.alpha < hi) || !(spec.alpha > n))
      throw InfeasibleParameters("alpha outside its admissible interval");
  }

  // gamma needs theta only when not overridden
  if (ov.gamma) {
    spec.gamma = *ov.gamma;
    spec.theta_used = cert ? cert->theta : 0.0;
    const bool ok = (n == 2) ? (spec.gamma > 0.0 && spec.gamma < 1.0)
                             : (spec.gamma > 0.0 && spec.gamma < n - 2.0);
    if (!ok)
      throw std::invalid_argument("initdata: gamma outside its admissible range");
  } else {
    spec.theta_used = cert ? cert->theta : detail::fast_path_theta(model);
    if (n == 2) {
      spec.gamma = 0.5 * (1.0 - spec.theta_used);
    } else {
      const double lo = (1.0 - spec.theta_used) * n;
      const double hi = n - 2.0;
      if (!(lo < hi))
        throw InfeasibleParameters("empty gamma interval ((1-theta) n, n-2)");
      spec.gamma = 0.5 * (lo + hi);
    }
  }

  if (n >= 3) {
    spec.delta = ov.delta ? *ov.delta : n + 2.0;
    if (!(*spec.delta > n + 1.0))
      throw std::invalid_argument("initdata: delta must exceed n+1");
  } else if (ov.delta) {
    throw std::invalid_argument("initdata: delta applies to n >= 3 only");
  }
  return spec;
}

/// Discrete normalizer: 1 / sum_i V_i (r_i^2 + eta^2)^(-alpha/2), so that
/// the discrete mass of u_eta is exactly M_u.
inline double discrete_a_eta(const InitialDataSpec& spec, const RadialGrid& grid,
                             double eta) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i)
    s += grid.volumes[i] *
         std::pow(grid.centers[i] * grid.centers[i] + eta * eta, -0.5 * spec.alpha);
  return 1.0 / s;
}

inline RadialField build_u0(const InitialDataSpec& spec, const RadialGrid& grid) {
  if (!(spec.eta > 0.0))
    throw std::invalid_argument("build_u0: spec has no eta");
  const double a = discrete_a_eta(spec, grid, spec.eta);
  RadialField u(grid);
  for (std::size_t i = 0; i < grid.cells(); ++i)
    u[i] = spec.Mu * a *
           std::pow(grid.centers[i] * grid.centers[i] + spec.eta * spec.eta,
                    -0.5 * spec.alpha);
  return u;
}

inline RadialField build_v0(const InitialDataSpec& spec, const RadialGrid& grid) {
  if (!(spec.eta > 0.0))
    throw std::invalid_argument("build_v0: spec has no eta");
  const double R = grid.R;
  const double eta2 = spec.eta * spec.eta;
  RadialField v(grid);
  if (grid.n == 2) {
    const double scale = std::pow(std::log(R / spec.eta), -spec.gamma);
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      const double r2 = grid.centers[i] * grid.centers[i];
      v[i] = scale * std::log(2.0 * R * R / (r2 + eta2));
    }
  } else {
    if (!spec.delta)
      throw std::invalid_argument("build_v0: n >= 3 needs delta");
    const double scale = std::pow(spec.eta, *spec.delta - spec.gamma);
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      const double r2 = grid.centers[i] * grid.centers[i];
      v[i] = scale * std::pow(r2 + eta2, -0.5 * *spec.delta);
    }
  }
  return v;
}

struct FamilyNorms {
  double eta = 0.0;
  double sup_ralpha_u = 0.0;  // sup_i r_i^alpha u_i
  double v_w1p = 0.0;         // discrete W^{1,p} norm of v
  double rbeta_v_w1inf = 0.0; // discrete W^{1,inf} norm of r^beta v
};

class UniformityViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct UniformBoundsReport {
  std::vector<FamilyNorms> per_eta;  // in the given eta order
  double L = 0.0;                    // max over family and quantities
};

/// Discrete versions of the family's uniform bounds: computes the three
/// norms for each eta and their max L. Uniformity means the sequences do
/// not grow as eta halves; growth above 5% per halving throws (or is
/// reported, when throw_on_violation is false).
inline UniformBoundsReport verify_uniform_bounds(const InitialDataSpec& spec,
                                                 const RadialGrid& grid,
                                                 const std::vector<double>& etas,
                                                 bool throw_on_violation = true) {
  UniformBoundsReport rep;
  for (double eta : etas) {
    const InitialDataSpec se = spec.with_eta(eta);
    const RadialField u = build_u0(se, grid);
    const RadialField v = build_v0(se, grid);
    FamilyNorms norms;
    norms.eta = eta;
    for (std::size_t i = 0; i < grid.cells(); ++i)
      norms.sup_ralpha_u = std::max(
          norms.sup_ralpha_u, std::pow(grid.centers[i], spec.alpha) * u[i]);
    double wp = 0.0;
    for (std::size_t i = 0; i < grid.cells(); ++i)
      wp += grid.volumes[i] * std::pow(std::abs(v[i]), spec.p);
    for (std::size_t f = 0; f + 1 < grid.cells(); ++f) {
      const double dv = (v[f + 1] - v[f]) / grid.center_gaps[f];
      wp += detail::face_weight(grid, f) * std::pow(std::abs(dv), spec.p);
    }
    norms.v_w1p = std::pow(wp, 1.0 / spec.p);
    double winf = 0.0;
    std::vector<double> w(grid.cells());
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      w[i] = std::pow(grid.centers[i], spec.beta) * v[i];
      winf = std::max(winf, std::abs(w[i]));
    }
    for (std::size_t f = 0; f + 1 < grid.cells(); ++f)
      winf = std::max(winf,
                      std::abs((w[f + 1] - w[f]) / grid.center_gaps[f]));
    norms.rbeta_v_w1inf = winf;
    rep.per_eta.push_back(norms);
    rep.L = std::max({rep.L, norms.sup_ralpha_u, norms.v_w1p, norms.rbeta_v_w1inf});
  }
  for (std::size_t k = 1; k < rep.per_eta.size(); ++k) {
    const FamilyNorms& a = rep.per_eta[k - 1];
    const FamilyNorms& b = rep.per_eta[k];
    const auto grew = [](double prev, double next) {
      return next > 1.05 * prev;
    };
    std::string offender;
    if (grew(a.sup_ralpha_u, b.sup_ralpha_u)) offender = "sup r^alpha u";
    else if (grew(a.v_w1p, b.v_w1p)) offender = "W^{1,p} norm of v";
    else if (grew(a.rbeta_v_w1inf, b.rbeta_v_w1inf)) offender = "W^{1,inf} norm of r^beta v";
    if (!offender.empty() && throw_on_violation)
      throw UniformityViolation(offender + " grew by more than 5% at eta = " +
                                std::to_string(b.eta));
  }
  return rep;
}

struct FamilyEnergy {
  double eta = 0.0;
  EnergyRecord record;
};

/// Energy of the family member by member, in the given eta order.
inline std::vector<FamilyEnergy> energy_of_family(const MotilityModel& model,
                                                  const InitialDataSpec& spec,
                                                  const RadialGrid& grid,
                                                  const std::vector<double>& etas) {
  std::vector<FamilyEnergy> out;
  out.reserve(etas.size());
  for (double eta : etas) {
    const InitialDataSpec se = spec.with_eta(eta);
    StateSnapshot s(0.0, build_u0(se, grid), build_v0(se, grid));
    out.push_back({eta, compute_F(s, model)});
  }
  return out;
}

/// Finite-sample stand-in for energy divergence along the family:
/// the last value lies below the first by more than 10 and the
/// sequence decreases over the final three halvings.
inline bool family_energy_diverges(const std::vector<FamilyEnergy>& fam) {
  if (fam.size() < 4) return false;
  if (!(fam.back().record.F < fam.front().record.F - 10.0)) return false;
  for (std::size_t k = fam.size() - 3; k < fam.size(); ++k)
    if (!(fam[k].record.F < fam[k - 1].record.F)) return false;
  return true;
}

}  // namespace kslab
