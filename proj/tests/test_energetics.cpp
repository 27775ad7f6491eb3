#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "kslab/energetics.hpp"
#include "kslab/grid.hpp"

using kslab::compute_D;
using kslab::compute_F;
using kslab::compute_fields;
using kslab::EnergyRecord;
using kslab::MotilityModel;
using kslab::RadialGrid;
using kslab::StateSnapshot;

namespace {

StateSnapshot homogeneous(const RadialGrid& g, double ubar, double vbar) {
  return {0.0, kslab::sample_field(g, [=](double) { return ubar; }),
          kslab::sample_field(g, [=](double) { return vbar; })};
}

}  // namespace

TEST_CASE("homogeneous energy has the closed form", "[energetics]") {
  const auto g = RadialGrid::uniform(3, 1.0, 256);
  const auto model = MotilityModel::prototype(3, 1.0, 1.0, 1.0);
  const double ubar = 3.0, vbar = 1.5;
  const auto rec = compute_F(homogeneous(g, ubar, vbar), model);
  const double vol = g.ball_volume();
  const double expect =
      vol * (0.5 * vbar * vbar - ubar * vbar + model.eval_G(ubar));
  CHECK(rec.F == Catch::Approx(expect).epsilon(1e-12));
  CHECK(rec.term_grad == 0.0);
  CHECK(rec.mass_u == Catch::Approx(ubar * vol).epsilon(1e-13));
  // the four summands recombine to F
  CHECK(rec.term_grad + rec.term_v2 + rec.term_uv + rec.term_G ==
        Catch::Approx(rec.F).epsilon(1e-12));
}

TEST_CASE("vacuum state carries only the G term", "[energetics]") {
  const auto g = RadialGrid::uniform(2, 1.0, 128);
  const auto model = MotilityModel::prototype(2, 1.0, 0.4, 0.6);
  const auto rec = compute_F(homogeneous(g, 0.0, 0.0), model);
  CHECK(rec.F == Catch::Approx(g.ball_volume() * model.eval_G(0.0)).epsilon(1e-12));
}

TEST_CASE("gradient term is exactly quadratic in v", "[energetics]") {
  const auto g = RadialGrid::uniform(2, 1.0, 200);
  const auto model = MotilityModel::prototype(2, 1.0, 1.0, 1.0);
  auto v = kslab::sample_field(g, [](double r) { return std::cos(3.0 * r) + 2.0; });
  auto u = kslab::sample_field(g, [](double) { return 1.0; });
  StateSnapshot s1(0.0, u, v);
  const double g1 = compute_F(s1, model).term_grad;
  for (auto& x : v.values) x *= 2.0;
  StateSnapshot s2(0.0, u, v);
  CHECK(compute_F(s2, model).term_grad == Catch::Approx(4.0 * g1).epsilon(1e-14));
}

TEST_CASE("fields of a homogeneous state", "[energetics]") {
  const auto g = RadialGrid::uniform(3, 2.0, 64);
  const auto model = MotilityModel::prototype(3, 2.0, 1.0, 1.0);
  const auto [f, gc] = compute_fields(homogeneous(g, 3.0, 1.0), model);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i] == Catch::Approx(2.0).epsilon(1e-13));
    CHECK(gc[i] == 0.0);
  }
}

TEST_CASE("manufactured stationary pair gives small f", "[energetics]") {
  // pick v with v_r(0) = v_r(R) = 0 and set u = v - Lap v; then f ~ O(h^2)
  const int n = 3;
  const double R = 1.0;
  const auto model = MotilityModel::prototype(n, R, 1.0, 1.0);
  const auto vfun = [&](double r) {
    return 0.05 * std::cos(std::numbers::pi * r / R) + 2.0;
  };
  const auto lap = [&](double r) {
    const double k = std::numbers::pi / R;
    // radial Laplacian of cos(kr): -k^2 cos(kr) - (n-1)/r k sin(kr)
    return 0.05 * (-k * k * std::cos(k * r) - (n - 1) / r * k * std::sin(k * r));
  };
  double err_prev = 0.0;
  for (std::size_t N : {128, 256}) {
    const auto g = RadialGrid::uniform(n, R, N);
    const auto v = kslab::sample_field(g, vfun);
    const auto u = kslab::sample_field(g, [&](double r) { return vfun(r) - lap(r); });
    const auto [f, gc] = compute_fields({0.0, u, v}, model);
    double emax = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) emax = std::max(emax, std::abs(f[i]));
    if (err_prev > 0.0) {
      const double order = std::log2(err_prev / emax);
      CHECK(order > 1.2);
    }
    err_prev = emax;
  }
}

TEST_CASE("dissipation of homogeneous states", "[energetics]") {
  const auto g = RadialGrid::uniform(2, 1.0, 128);
  const auto model = MotilityModel::prototype(2, 1.0, 1.0, 1.0);
  CHECK(compute_D(homogeneous(g, 2.0, 2.0), model) == Catch::Approx(0.0).margin(1e-24));
  const double vol = g.ball_volume();
  CHECK(compute_D(homogeneous(g, 3.0, 1.0), model) ==
        Catch::Approx(vol * 4.0).epsilon(1e-12));
  // nonnegative on rough data
  const auto u = kslab::sample_field(g, [](double r) { return 1.0 + std::sin(20 * r) * std::sin(20 * r); });
  const auto v = kslab::sample_field(g, [](double r) { return std::exp(-r); });
  CHECK(compute_D({0.0, u, v}, model) >= 0.0);
}

TEST_CASE("identity residual on an equilibrium trace is zero", "[energetics]") {
  std::vector<EnergyRecord> trace(5);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    trace[k].t = 0.1 * k;
    trace[k].F = -7.0;
    trace[k].D = 0.0;
  }
  const auto rep = kslab::verify_energy_identity(trace);
  CHECK(rep.median_residual == 0.0);
  CHECK(rep.max_residual == 0.0);
  CHECK(rep.pass);
  trace.resize(2);
  CHECK_THROWS_AS(kslab::verify_energy_identity(trace), std::invalid_argument);
}

TEST_CASE("scaling fit recovers a synthetic power law", "[energetics]") {
  // -F = (c (T - t))^(-1/lambda) with gamma = 0.6, c = 0.8, T = 1
  const double gamma = 0.6;
  const double lambda = (1.0 - gamma) / gamma;
  const double c = 0.8, T = 1.0;
  std::vector<EnergyRecord> trace;
  for (int k = 0; k < 60; ++k) {
    const double t = 0.2 + 0.6 * k / 59.0;
    EnergyRecord r;
    r.t = t;
    r.F = -std::pow(c * (T - t), -1.0 / lambda);
    r.D = (c / lambda) * std::pow(c * (T - t), -1.0 / lambda - 1.0);
    trace.push_back(r);
  }
  const auto fit = kslab::fit_F_D_scaling(trace, 3);
  REQUIRE(fit.has_value());
  CHECK(fit->gamma_hat == Catch::Approx(gamma).epsilon(0.05));
  CHECK(fit->points >= 10);
  CHECK(fit->gamma_floor == Catch::Approx(5.0 / 7.0));

  // all-zero dissipation: no qualifying records
  for (auto& r : trace) r.D = 0.0;
  CHECK_FALSE(kslab::fit_F_D_scaling(trace, 3).has_value());
}

TEST_CASE("blow-up bound arithmetic", "[energetics]") {
  const auto b = kslab::odi_blowup_bound(-2.0, {0.5, 0.5});
  REQUIRE(b.has_value());
  CHECK(b->T_bound == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(b->curve(0.0) == Catch::Approx(1.0).epsilon(1e-12));

  // hypothesis needs strict inequality F0 < -2 c1
  CHECK_FALSE(kslab::odi_blowup_bound(-1.0, {0.5, 0.5}).has_value());
  CHECK_FALSE(kslab::odi_blowup_bound(5.0, {0.5, 0.5}).has_value());
  // degenerate limit gamma -> 1
  CHECK_FALSE(kslab::odi_blowup_bound(-100.0, {0.5, 1.0 - 1e-12}).has_value());
  CHECK_THROWS_AS(kslab::odi_blowup_bound(-1.0, {-0.5, 0.5}), std::invalid_argument);

  // antitone in c1: larger c1, smaller bound
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double c1 = 0.05 + 0.05 * i;
    const auto bi = kslab::odi_blowup_bound(-1e9, {c1, 0.4});
    REQUIRE(bi.has_value());
    CHECK(bi->T_bound < prev);
    prev = bi->T_bound;
  }
}
