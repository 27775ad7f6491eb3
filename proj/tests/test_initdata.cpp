#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "kslab/initdata.hpp"

using kslab::build_u0;
using kslab::build_v0;
using kslab::choose_parameters;
using kslab::InitialDataSpec;
using kslab::MotilityModel;
using kslab::RadialGrid;

namespace {

std::vector<double> halvings(double eta0, int from, int to) {
  std::vector<double> etas;
  for (int k = from; k <= to; ++k) etas.push_back(eta0 / std::pow(2.0, k));
  return etas;
}

}  // namespace

TEST_CASE("midpoint parameter selection", "[initdata]") {
  // planar point with M(m,q) >= 1
  const auto s2 = choose_parameters(MotilityModel::prototype(2, 1.0, 1.0, 1.0), 1.0);
  CHECK(s2.p == Catch::Approx(1.5));
  CHECK(s2.beta == Catch::Approx(5.0 / 3.0));
  CHECK(s2.alpha == Catch::Approx(3.0));
  CHECK(s2.eta0 == Catch::Approx(0.5));

  // spatial point, M >= 1
  const auto s3 = choose_parameters(MotilityModel::prototype(3, 1.0, 1.0, 1.0), 1.0);
  CHECK(s3.p == Catch::Approx(1.25));
  CHECK(s3.beta == Catch::Approx(2.7));
  CHECK(s3.alpha == Catch::Approx(4.0));
  REQUIRE(s3.delta.has_value());
  CHECK(*s3.delta == Catch::Approx(5.0));
  CHECK(s3.gamma > 0.0);
  CHECK(s3.gamma < 1.0);
}

TEST_CASE("beta feasibility search opens the alpha interval", "[initdata]") {
  // (n, m, q) = (2, 0.4, 0.6): the midpoint beta = 5/3 gives an empty
  // interval; bisection toward n/p stops at beta = 17/12
  const auto s = choose_parameters(MotilityModel::prototype(2, 1.0, 0.4, 0.6), 1.0);
  CHECK(s.p == Catch::Approx(1.5));
  CHECK(s.beta == Catch::Approx(17.0 / 12.0).epsilon(1e-12));
  const double lower = 2.0 * s.beta / 0.6;
  const double upper = 2.0 / 0.4;
  CHECK(lower < upper);
  CHECK(s.alpha == Catch::Approx(0.5 * (lower + upper)).epsilon(1e-10));
  CHECK(s.alpha > 2.0);
}

TEST_CASE("infeasible parameter points are rejected", "[initdata]") {
  // q large enough that the main condition fails: no feasible alpha
  CHECK_THROWS_AS(
      choose_parameters(MotilityModel::prototype(2, 1.0, 0.3, 0.9), 1.0),
      kslab::InfeasibleParameters);
  CHECK_THROWS_AS(
      choose_parameters(MotilityModel::prototype(2, 1.0, 1.0, 1.0), -1.0),
      std::invalid_argument);
}

TEST_CASE("overrides replace the midpoint rules", "[initdata]") {
  kslab::InitDataOverrides ov;
  ov.gamma = 0.95;
  ov.delta = 4.2;
  const auto s = choose_parameters(MotilityModel::prototype(3, 0.04, 1.0, 1.0), 1.0,
                                   std::nullopt, ov);
  CHECK(s.gamma == 0.95);
  CHECK(*s.delta == 4.2);
  ov.gamma = 1.5;  // out of (0, n-2)
  CHECK_THROWS_AS(choose_parameters(MotilityModel::prototype(3, 0.04, 1.0, 1.0), 1.0,
                                    std::nullopt, ov),
                  std::invalid_argument);
}

TEST_CASE("u0 has exact discrete mass and decreases radially", "[initdata]") {
  InitialDataSpec spec;
  spec.Mu = 2.5;
  spec.eta0 = 0.5;
  spec.alpha = 4.0;
  spec.p = 1.25;
  spec.beta = 2.7;
  spec.gamma = 0.75;
  spec.delta = 5.0;
  const auto grid = RadialGrid::graded_for_scale(3, 1.0, 1024, 0.05);
  const auto u = build_u0(spec.with_eta(0.05), grid);
  CHECK(u.integral() == Catch::Approx(2.5).epsilon(1e-14));
  for (std::size_t i = 0; i + 1 < u.size(); ++i) REQUIRE(u[i] >= u[i + 1]);
  CHECK_THROWS_AS(spec.with_eta(0.6), std::invalid_argument);
  CHECK_THROWS_AS(build_u0(spec, grid), std::invalid_argument);
}

TEST_CASE("discrete normalizer approaches the closed-form integral", "[initdata]") {
  // n = 2, R = 1, alpha = 3, eta = 0.1:
  // 1/a = 2 pi int_0^1 r (r^2+eta^2)^(-3/2) dr = 2 pi (1/eta - (1+eta^2)^(-1/2))
  InitialDataSpec spec;
  spec.Mu = 1.0;
  spec.eta0 = 0.5;
  spec.alpha = 3.0;
  spec.p = 1.5;
  spec.beta = 5.0 / 3.0;
  spec.gamma = 0.25;
  const auto grid = RadialGrid::uniform(2, 1.0, 4096);
  const double a = kslab::discrete_a_eta(spec, grid, 0.1);
  const double a_exact =
      1.0 / (2.0 * std::numbers::pi * (10.0 - 1.0 / std::sqrt(1.01)));
  CHECK(a == Catch::Approx(a_exact).epsilon(1e-3));
  CHECK(a_exact == Catch::Approx(0.0176741).epsilon(1e-4));
}

TEST_CASE("v0 matches its defining formulas", "[initdata]") {
  InitialDataSpec spec;
  spec.Mu = 1.0;
  spec.eta0 = 0.5;
  spec.alpha = 3.0;
  spec.p = 1.5;
  spec.beta = 5.0 / 3.0;
  spec.gamma = 0.25;
  const auto g2 = RadialGrid::uniform(2, 1.0, 2048);
  const auto v2 = build_v0(spec.with_eta(0.1), g2);
  const double r0 = g2.centers[0];
  const double expect =
      std::pow(std::log(10.0), -0.25) * std::log(2.0 / (r0 * r0 + 0.01));
  CHECK(v2[0] == Catch::Approx(expect).epsilon(1e-12));
  CHECK(v2[0] == Catch::Approx(4.30).margin(0.01));
  for (std::size_t i = 0; i + 1 < v2.size(); ++i) {
    REQUIRE(v2[i] > 0.0);
    REQUIRE(v2[i] >= v2[i + 1]);
  }

  spec.alpha = 4.0;
  spec.gamma = 0.75;
  spec.delta = 5.0;
  const auto g3 = RadialGrid::graded_for_scale(3, 1.0, 1024, 0.1);
  const auto v3 = build_v0(spec.with_eta(0.1), g3);
  // v(0) = eta^(-gamma), approached at the innermost cell center
  CHECK(v3[0] == Catch::Approx(std::pow(0.1, -0.75)).epsilon(1e-4));
  for (std::size_t i = 0; i + 1 < v3.size(); ++i) REQUIRE(v3[i] >= v3[i + 1]);
}

TEST_CASE("family norms are uniform in eta", "[initdata]") {
  InitialDataSpec spec;
  spec.Mu = 1.0;
  spec.eta0 = 0.5;
  spec.alpha = 4.0;
  spec.p = 1.25;
  spec.beta = 2.7;
  spec.gamma = 0.75;
  spec.delta = 5.0;
  const auto etas = halvings(0.5, 1, 6);
  const auto grid = RadialGrid::graded_for_scale(3, 1.0, 1024, etas.back());
  const auto rep = kslab::verify_uniform_bounds(spec, grid, etas);
  REQUIRE(rep.per_eta.size() == etas.size());
  CHECK(rep.L > 0.0);
  // pointwise envelope: sup r^alpha u_eta <= Mu a_{eta0}, uniformly in eta
  const double a0 = kslab::discrete_a_eta(spec, grid, spec.eta0);
  for (const auto& norms : rep.per_eta) {
    CHECK(norms.sup_ralpha_u <= spec.Mu * a0 * (1 + 1e-12));
    CHECK(norms.v_w1p <= rep.L);
    CHECK(norms.rbeta_v_w1inf <= rep.L);
  }
}

TEST_CASE("family energy decreases without bound", "[initdata]") {
  // spatial prototype at the minimal blow-up point; the overrides sharpen
  // the cell profile (alpha) and flatten the signal (gamma, delta) so the
  // -int uv term dominates already at desk scale
  const auto model = MotilityModel::prototype(3, 0.01, 1.0, 1.0);
  kslab::InitDataOverrides ov;
  ov.alpha = 8.0;
  ov.gamma = 0.75;
  ov.delta = 4.05;
  const auto spec = choose_parameters(model, 1.0, std::nullopt, ov);
  const auto etas = halvings(spec.eta0, 1, 6);
  const auto grid = RadialGrid::graded_for_scale(3, 0.01, 1024, etas.back());
  const auto fam = kslab::energy_of_family(model, spec, grid, etas);
  REQUIRE(fam.size() == 6);
  for (std::size_t k = fam.size() - 3; k < fam.size(); ++k)
    CHECK(fam[k].record.F < fam[k - 1].record.F);
  CHECK(fam.back().record.F < fam.front().record.F - 10.0);
  // eta = eta0/2 is smooth data: finite energy
  CHECK(std::isfinite(fam.front().record.F));
  CHECK(kslab::family_energy_diverges(fam));
  // the -int uv term does the diverging; the others stay dominated
  const auto& last = fam.back().record;
  CHECK(-last.term_uv > last.term_grad);
  CHECK(-last.term_uv > last.term_G);
}

TEST_CASE("planar log-model family also diverges", "[initdata]") {
  const auto model = MotilityModel::prototype_log(1.0, 1.0);
  kslab::InitDataOverrides ov;
  ov.gamma = 0.4;
  const auto spec = choose_parameters(model, 30.0, std::nullopt, ov);
  const auto etas = halvings(spec.eta0, 1, 8);
  const auto grid = RadialGrid::graded_for_scale(2, 1.0, 1024, etas.back());
  const auto fam = kslab::energy_of_family(model, spec, grid, etas);
  for (std::size_t k = fam.size() - 3; k < fam.size(); ++k)
    CHECK(fam[k].record.F < fam[k - 1].record.F);
  CHECK(fam.back().record.F < fam.front().record.F - 10.0);
}

TEST_CASE("family energy is stable under grid refinement", "[initdata]") {
  const auto model = MotilityModel::prototype(3, 1.0, 1.0, 1.0);
  const auto spec = choose_parameters(model, 1.0);
  const double eta = 0.05;
  std::vector<double> F;
  for (std::size_t N : {512, 1024, 2048}) {
    const auto grid = RadialGrid::graded_for_scale(3, 1.0, N, eta);
    const auto fam = kslab::energy_of_family(model, spec, grid, {eta});
    F.push_back(fam[0].record.F);
  }
  // second-order quadrature: refinement deltas shrink markedly
  const double d1 = std::abs(F[1] - F[0]);
  const double d2 = std::abs(F[2] - F[1]);
  CHECK(d2 < 0.5 * d1);
}
