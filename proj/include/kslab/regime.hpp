#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kslab/motility.hpp"

namespace kslab {

/// Regime labels for a parameter point (n, m, q):
///   GB     - all solutions global and bounded        (m - q > (n-2)/n)
///   IFTBU  - global, some unbounded in infinite time (supercritical, q <= 0)
///   FTBU   - finite-time blow-up solutions exist     (supercritical, q > 0,
///            main condition holds)
///   UNKNOWN - anything else, including the critical line m - q = (n-2)/n.
enum class Regime { GB, IFTBU, FTBU, UNKNOWN };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::GB: return "GB";
    case Regime::IFTBU: return "IFTBU";
    case Regime::FTBU: return "FTBU";
    case Regime::UNKNOWN: return "UNKNOWN";
  }
  return "?";
}

/// Result of evaluating the main condition
///   (1 - M(m,q)) * n(n-1) / (n(m-q2)+1)_+ < 2,
/// with the convention that a/0 < 2 holds exactly for a <= 0.
/// `lhs` is absent when the denominator clamps to zero.
struct Cond14Result {
  bool holds = false;
  std::optional<double> lhs;
  bool denominator_clamped = false;
};

struct RegimeVerdict {
  Regime regime = Regime::UNKNOWN;
  bool cond_supercritical = false;     // m - q < (n-2)/n
  double margin_supercritical = 0.0;   // m - q - (n-2)/n
  Cond14Result cond_main;
  bool cond_q_positive = false;
  std::vector<std::string> notes;
};

inline Cond14Result check_condition_1_4(int n, double m, double q1, double q2) {
  if (n < 2) throw std::invalid_argument("check_condition_1_4: n must be >= 2");
  if (!(q1 > 0.0) || !(q2 >= q1))
    throw std::invalid_argument("check_condition_1_4: need 0 < q1 <= q2");
  const double Mmq = std::max(q1, m + q1 - q2);
  const double numer = 1.0 - Mmq;
  const double denom = n * (m - q2) + 1.0;
  // decimal parameters that zero the denominator in real arithmetic land a
  // few ulps off in binary; treat that band as the clamped case
  const double zero_band = 1e-12 * std::max(1.0, std::abs(n * (m - q2)));
  Cond14Result res;
  if (denom <= zero_band) {
    res.denominator_clamped = true;
    res.holds = numer <= 0.0;
    return res;
  }
  res.lhs = numer * static_cast<double>(n) * (n - 1) / denom;
  res.holds = *res.lhs < 2.0;
  return res;
}

inline RegimeVerdict classify(int n, double m, double q) {
  if (n < 2) throw std::invalid_argument("classify: n must be >= 2");
  RegimeVerdict v;
  const double crit = static_cast<double>(n - 2) / n;
  v.margin_supercritical = m - q - crit;
  v.cond_supercritical = v.margin_supercritical < 0.0;
  v.cond_q_positive = q > 0.0;

  if (v.margin_supercritical > 0.0) {
    v.regime = Regime::GB;
    v.notes.push_back("m - q > (n-2)/n: all solutions globally bounded");
    return v;
  }
  if (v.margin_supercritical == 0.0) {
    v.regime = Regime::UNKNOWN;
    v.notes.push_back("critical line m - q = (n-2)/n: no classification");
    return v;
  }
  if (!v.cond_q_positive) {
    v.regime = Regime::IFTBU;
    v.notes.push_back("q <= 0: solutions global, blow-up only in infinite time");
    return v;
  }
  v.cond_main = check_condition_1_4(n, m, q, q);
  if (v.cond_main.holds) {
    v.regime = Regime::FTBU;
    v.notes.push_back("supercritical with q > 0 and main condition: finite-time blow-up");
  } else {
    v.regime = Regime::UNKNOWN;
    v.notes.push_back("supercritical with q > 0 but main condition fails");
  }
  return v;
}

class CertificationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical admissibility certificate for a motility model: positivity and
/// the comparison sandwich checked samplewise on [0, S_max], the growth
/// envelopes of G and H fitted with the smallest constants that hold on the
/// sample set (times a 1.05 safety factor). Sample-based only; `s_lo`/`s_hi`
/// record the certified range.
struct AdmissibilityCertificate {
  int n = 2;
  double Mmq = 0.0;
  bool cond_2_3 = false;
  double a = 0.0;
  double theta = 0.0;
  std::optional<double> b;         // n = 2:  H(s) <= b s / ln s
  std::optional<double> vartheta;  // n >= 3: H <= (n-2-vartheta)/n G + K(s+1)
  std::optional<double> K;
  double s_lo = 0.0, s_hi = 0.0;
  int samples = 0;
  double max_residual = 0.0;  // largest (lhs - rhs)/max(|rhs|,1) over all checks
};

namespace detail {

// A candidate envelope exponent passes when the sample ratio sequence has
// stopped setting new highs at the right edge of the range.
inline bool tail_settled(const std::vector<double>& ratio) {
  const std::size_t n = ratio.size();
  if (n < 8) return false;
  const std::size_t cut = n - std::max<std::size_t>(1, n / 10);
  double head_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cut; ++i) head_max = std::max(head_max, ratio[i]);
  const double slack = 1e-3 * std::max(std::abs(head_max), 1.0);
  for (std::size_t i = cut; i < n; ++i)
    if (ratio[i] > head_max + slack) return false;
  return true;
}

inline std::optional<double> pick_exponent(
    double lo, double hi, double preferred,
    const std::function<std::vector<double>(double)>& ratios) {
  const int kCandidates = 1000;
  std::optional<double> best;
  for (int i = 1; i <= kCandidates; ++i) {
    const double t = lo + (hi - lo) * i / (kCandidates + 1.0);
    if (!tail_settled(ratios(t))) continue;
    if (!best || std::abs(t - preferred) < std::abs(*best - preferred))
      best = t;
  }
  return best;
}

}  // namespace detail

inline AdmissibilityCertificate certify_admissibility(const MotilityModel& model,
                                                      double S_max,
                                                      int samples) {
  const ModelParams& p = model.params();
  if (!(S_max > p.s0))
    throw std::invalid_argument("certify_admissibility: S_max must exceed s0");
  if (samples < 100)
    throw std::invalid_argument("certify_admissibility: need samples >= 100");

  AdmissibilityCertificate cert;
  cert.n = p.n;
  cert.Mmq = p.Mmq();
  cert.cond_2_3 = check_condition_1_4(p.n, p.m, p.q1, p.q2).holds;
  cert.s_lo = p.s0;
  cert.s_hi = S_max;
  cert.samples = samples;

  // log-spaced samples over [0, S_max]; positivity and sandwich everywhere
  std::vector<double> svals;
  svals.reserve(samples + 1);
  svals.push_back(0.0);
  const double lo = 1e-8;
  for (int i = 0; i < samples; ++i)
    svals.push_back(lo * std::pow(S_max / lo, double(i) / (samples - 1)));

  const double tol = 1e-9;
  for (double s : svals) {
    const double phi = model.eval_phi(s);
    const double pos = model.psi_over_s(s);
    if (!(phi > 0.0) || !(pos > 0.0))
      throw CertificationError("positivity violated at s = " + std::to_string(s));
    const double phi_env = std::pow(s + 1.0, p.m - 1.0);
    const double psi = model.eval_psi(s);
    const double psi_lo = p.Kpsi1 * s * std::pow(s + 1.0, p.q1 - 1.0);
    const double psi_hi = p.Kpsi2 * s * std::pow(s + 1.0, p.q2 - 1.0);
    if (phi < p.Kphi1 * phi_env * (1.0 - tol) ||
        phi > p.Kphi2 * phi_env * (1.0 + tol))
      throw CertificationError("phi sandwich violated at s = " + std::to_string(s));
    if (psi < psi_lo * (1.0 - tol) || psi > psi_hi * (1.0 + tol))
      throw CertificationError("psi sandwich violated at s = " + std::to_string(s));
  }

  // G and H on [s0, S_max]
  std::vector<double> sg, Gv, Hv;
  for (double s : svals)
    if (s >= p.s0) {
      sg.push_back(s);
      Gv.push_back(model.eval_G(s));
      Hv.push_back(model.eval_H(s));
    }
  if (sg.size() < 16)
    throw CertificationError("too few samples above s0 to certify envelopes");

  const auto fit_constant = [](const std::vector<double>& ratio) {
    double mx = 0.0;
    for (double r : ratio) mx = std::max(mx, r);
    return 1.05 * std::max(mx, 1e-12);
  };

  if (p.n == 2) {
    // G(s) <= a s ln^theta(s), theta in (0, 1)
    const auto ratios = [&](double th) {
      std::vector<double> r(sg.size());
      for (std::size_t i = 0; i < sg.size(); ++i)
        r[i] = Gv[i] / (sg[i] * std::pow(std::log(sg[i]), th));
      return r;
    };
    const auto theta = detail::pick_exponent(0.0, 1.0, 0.5, ratios);
    if (!theta)
      throw CertificationError("no admissible theta found in (0, 1) for the G envelope");
    cert.theta = *theta;
    cert.a = fit_constant(ratios(*theta));
    // H(s) <= b s / ln(s)
    std::vector<double> hr(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i)
      hr[i] = Hv[i] * std::log(sg[i]) / sg[i];
    if (!detail::tail_settled(hr))
      throw CertificationError("H envelope b s/ln s not settled on the sample range");
    cert.b = fit_constant(hr);
  } else {
    // G(s) <= a s^(2-theta), theta in (2/n, 1)
    const auto ratios = [&](double th) {
      std::vector<double> r(sg.size());
      for (std::size_t i = 0; i < sg.size(); ++i)
        r[i] = Gv[i] / std::pow(sg[i], 2.0 - th);
      return r;
    };
    const double th_lo = 2.0 / p.n;
    double preferred = 1.0 - (p.m - p.q2);  // exponent matching the prototype growth
    preferred = std::clamp(preferred, th_lo + 1e-6, 1.0 - 1e-6);
    const auto theta = detail::pick_exponent(th_lo, 1.0, preferred, ratios);
    if (!theta)
      throw CertificationError("no admissible theta found in (2/n, 1) for the G envelope");
    cert.theta = *theta;
    cert.a = fit_constant(ratios(*theta));
    // H(s) <= (n-2-vartheta)/n G(s) + K (s+1), vartheta in (0, 1)
    const auto hratios = [&](double vt) {
      const double c = (p.n - 2.0 - vt) / p.n;
      std::vector<double> r(sg.size());
      for (std::size_t i = 0; i < sg.size(); ++i)
        r[i] = (Hv[i] - c * Gv[i]) / (sg[i] + 1.0);
      return r;
    };
    double vt_pref = 0.5;
    if (p.m > p.q2)
      vt_pref = 0.5 * std::min(1.0, p.n - 2.0 - p.n * (p.m - p.q2));
    const auto vt = detail::pick_exponent(0.0, 1.0, vt_pref, hratios);
    if (!vt)
      throw CertificationError("no admissible vartheta found in (0, 1) for the H envelope");
    cert.vartheta = *vt;
    cert.K = fit_constant(hratios(*vt));
  }

  // residual: largest signed violation across the fitted envelopes
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sg.size(); ++i) {
    const double s = sg[i];
    double env_G, rhs_H;
    if (p.n == 2) {
      env_G = cert.a * s * std::pow(std::log(s), cert.theta);
      rhs_H = *cert.b * s / std::log(s);
    } else {
      env_G = cert.a * std::pow(s, 2.0 - cert.theta);
      rhs_H = (p.n - 2.0 - *cert.vartheta) / p.n * Gv[i] + *cert.K * (s + 1.0);
    }
    worst = std::max(worst, (Gv[i] - env_G) / std::max(std::abs(env_G), 1.0));
    worst = std::max(worst, (Hv[i] - rhs_H) / std::max(std::abs(rhs_H), 1.0));
  }
  cert.max_residual = worst;
  return cert;
}

/// Row-major grid of verdicts: index = iq * m_values.size() + im.
struct RegimeGrid {
  int n = 2;
  std::vector<double> m_values;
  std::vector<double> q_values;
  std::vector<RegimeVerdict> verdicts;

  const RegimeVerdict& at(std::size_t im, std::size_t iq) const {
    return verdicts[iq * m_values.size() + im];
  }
};

inline RegimeGrid scan_region(int n, std::pair<double, double> m_range,
                              std::pair<double, double> q_range, int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("scan_region: resolution must be >= 2");
  RegimeGrid grid;
  grid.n = n;
  grid.m_values.resize(resolution);
  grid.q_values.resize(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double t = double(i) / (resolution - 1);
    grid.m_values[i] = m_range.first + t * (m_range.second - m_range.first);
    grid.q_values[i] = q_range.first + t * (q_range.second - q_range.first);
  }
  grid.verdicts.reserve(std::size_t(resolution) * resolution);
  for (double q : grid.q_values)
    for (double m : grid.m_values) grid.verdicts.push_back(classify(n, m, q));
  return grid;
}

}  // namespace kslab
