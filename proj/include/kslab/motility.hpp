#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "kslab/quadrature.hpp"

namespace kslab {

/// Static problem definition: dimension, domain radius, growth exponents of
/// the nonlinearity pair and the comparison constants sandwiching it,
///   Kphi1 (s+1)^(m-1) <= phi(s) <= Kphi2 (s+1)^(m-1),
///   Kpsi1 s (s+1)^(q1-1) <= psi(s) <= Kpsi2 s (s+1)^(q2-1),
/// plus the anchor point s0 > 1 of the derived functionals G and H.
struct ModelParams {
  int n = 2;
  double R = 1.0;
  double m = 1.0;
  double q1 = 1.0;
  double q2 = 1.0;
  double Kphi1 = 1.0, Kphi2 = 1.0;
  double Kpsi1 = 1.0, Kpsi2 = 1.0;
  double s0 = 2.0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("ModelParams: n must be >= 2");
    if (!(R > 0.0)) throw std::invalid_argument("ModelParams: R must be > 0");
    if (!(q1 > 0.0) || !(q2 >= q1))
      throw std::invalid_argument("ModelParams: need 0 < q1 <= q2");
    if (!(s0 > 1.0)) throw std::invalid_argument("ModelParams: s0 must be > 1");
    if (!(Kphi1 > 0.0) || !(Kphi2 > 0.0) || !(Kpsi1 > 0.0) || !(Kpsi2 > 0.0))
      throw std::invalid_argument("ModelParams: K constants must be > 0");
  }

  /// max{q1, m + q1 - q2}, the exponent governing the main parameter condition.
  double Mmq() const { return std::max(q1, m + q1 - q2); }
};

enum class MotilityKind { prototype, prototype_log, custom };

/// The nonlinearity pair (phi, psi) together with the scalar functionals
///   G(s) = int_{s0}^{s} int_{s0}^{sigma} phi(tau)/psi(tau) dtau dsigma,
///   H(s) = int_{s0}^{s} sigma phi(sigma)/psi(sigma) dsigma.
///
/// The prototype family is phi(s) = (s+1)^(m-1), psi(s) = s (s+1)^(q-1);
/// the log variant (planar case only) multiplies psi by ln(s+e) with m = q.
/// G is evaluated through the single-integral reduction
///   G(s) = int_{s0}^{s} (s - tau) phi(tau)/psi(tau) dtau,
/// exact reordering of the double integral, which also yields G >= 0 for
/// s < s0. Closed forms are used where the prototype admits them; otherwise
/// adaptive quadrature to relative tolerance 1e-10.
///
/// Immutable after construction; all evaluators are pure and safe to share
/// across threads.
class MotilityModel {
public:
  static MotilityModel prototype(int n, double R, double m, double q,
                                 double s0 = 2.0) {
    MotilityModel mdl;
    mdl.kind_ = MotilityKind::prototype;
    mdl.params_.n = n;
    mdl.params_.R = R;
    mdl.params_.m = m;
    mdl.params_.q1 = q;
    mdl.params_.q2 = q;
    mdl.params_.s0 = s0;
    mdl.params_.validate();
    return mdl;
  }

  /// phi(s) = (s+1)^(m-1), psi(s) = s (s+1)^(m-1) ln(s+e); planar case only.
  /// The sandwich exponents are q1 = m, q2 = 1.25 m with Kpsi2 fitted
  /// numerically so that ln(s+e) <= Kpsi2 (s+1)^(q2-q1) on the sample range.
  static MotilityModel prototype_log(double R, double m,
                                     double s0 = 2.718281828459045) {
    if (!(m > 0.0))
      throw std::invalid_argument("prototype_log requires m = q > 0");
    MotilityModel mdl;
    mdl.kind_ = MotilityKind::prototype_log;
    mdl.params_.n = 2;
    mdl.params_.R = R;
    mdl.params_.m = m;
    mdl.params_.q1 = m;
    mdl.params_.q2 = 1.25 * m;
    mdl.params_.s0 = s0;
    mdl.params_.Kpsi2 = fit_log_envelope(mdl.params_.q2 - mdl.params_.q1);
    mdl.params_.validate();
    return mdl;
  }

  static MotilityModel custom(ModelParams params,
                              std::function<double(double)> phi,
                              std::function<double(double)> psi) {
    params.validate();
    if (!phi || !psi)
      throw std::invalid_argument("custom model needs phi and psi evaluators");
    MotilityModel mdl;
    mdl.kind_ = MotilityKind::custom;
    mdl.params_ = params;
    mdl.phi_fn_ = std::move(phi);
    mdl.psi_fn_ = std::move(psi);
    return mdl;
  }

  MotilityKind kind() const { return kind_; }
  const ModelParams& params() const { return params_; }
  double s0() const { return params_.s0; }

  double eval_phi(double s) const {
    check_arg(s);
    switch (kind_) {
      case MotilityKind::prototype:
      case MotilityKind::prototype_log:
        return pow1p(s, params_.m - 1.0);
      case MotilityKind::custom:
        return phi_fn_(s);
    }
    return 0.0;  // unreachable
  }

  double eval_psi(double s) const {
    check_arg(s);
    switch (kind_) {
      case MotilityKind::prototype:
        return s * pow1p(s, params_.q1 - 1.0);
      case MotilityKind::prototype_log:
        return s * pow1p(s, params_.q1 - 1.0) * std::log(s + kE);
      case MotilityKind::custom:
        return psi_fn_(s);
    }
    return 0.0;
  }

  /// psi(s)/s, continuously extended into s = 0.
  double psi_over_s(double s) const {
    check_arg(s);
    switch (kind_) {
      case MotilityKind::prototype:
        return pow1p(s, params_.q1 - 1.0);
      case MotilityKind::prototype_log:
        return pow1p(s, params_.q1 - 1.0) * std::log(s + kE);
      case MotilityKind::custom:
        return s > 0.0 ? psi_fn_(s) / s : psi_fn_(1e-30) / 1e-30;
    }
    return 0.0;
  }

  /// phi(s)/psi(s) for s > 0.
  double phi_over_psi(double s) const {
    switch (kind_) {
      case MotilityKind::prototype:
        return pow1p(s, params_.m - params_.q1) / s;
      case MotilityKind::prototype_log:
        return 1.0 / (s * std::log(s + kE));
      case MotilityKind::custom:
        return phi_fn_(s) / psi_fn_(s);
    }
    return 0.0;
  }

  double eval_G(double s) const {
    check_arg(s);
    const double s0 = params_.s0;
    if (s == s0) return 0.0;
    if (kind_ == MotilityKind::prototype && params_.m == params_.q1) {
      // phi/psi = 1/tau: G(s) = s ln(s/s0) - (s - s0)
      const double slog = (s == 0.0) ? 0.0 : s * std::log(s / s0);
      return slog - (s - s0);
    }
    const auto integrand = [this, s](double tau) {
      return (s - tau) * phi_over_psi(tau);
    };
    return integrate(integrand, s0, s);
  }

  double eval_H(double s) const {
    check_arg(s);
    const double s0 = params_.s0;
    if (s == s0) return 0.0;
    if (kind_ == MotilityKind::prototype) {
      // sigma phi/psi = (sigma+1)^(m-q)
      const double e = params_.m - params_.q1;
      if (e == -1.0) return std::log((s + 1.0) / (s0 + 1.0));
      return (std::pow(s + 1.0, e + 1.0) - std::pow(s0 + 1.0, e + 1.0)) /
             (e + 1.0);
    }
    const auto integrand = [this](double sig) {
      return sig * phi_over_psi(sig);
    };
    return integrate(integrand, s0, s);
  }

  /// s phi(s)/psi(s), the derivative of H; used by consistency checks.
  double dH(double s) const {
    check_arg(s);
    return s > 0.0 ? s * phi_over_psi(s) : eval_phi(0.0) / psi_over_s(0.0);
  }

private:
  static constexpr double kE = 2.718281828459045;

  static void check_arg(double s) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::domain_error("motility evaluator: argument must be finite and >= 0");
  }

  // (s+1)^e with the overwhelmingly common integer cases short-circuited;
  // the solver calls this in its inner flux loop.
  static double pow1p(double s, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return s + 1.0;
    if (e == -1.0) return 1.0 / (s + 1.0);
    return std::pow(s + 1.0, e);
  }

  static double fit_log_envelope(double dq) {
    double k = 1.0;
    for (int i = 0; i <= 4096; ++i) {
      const double s = std::pow(10.0, -6.0 + 16.0 * i / 4096.0);
      k = std::max(k, std::log(s + kE) / std::pow(s + 1.0, dq));
    }
    return 1.05 * k;
  }

  MotilityKind kind_ = MotilityKind::prototype;
  ModelParams params_;
  std::function<double(double)> phi_fn_;
  std::function<double(double)> psi_fn_;
};

}  // namespace kslab
