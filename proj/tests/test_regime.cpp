#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kslab/regime.hpp"

using kslab::check_condition_1_4;
using kslab::classify;
using kslab::MotilityModel;
using kslab::Regime;

TEST_CASE("classification of hand-picked points", "[regime]") {
  CHECK(classify(3, 1.0, 1.0).regime == Regime::FTBU);
  CHECK(classify(2, 1.2, 0.5).regime == Regime::GB);
  CHECK(classify(2, -0.5, -0.2).regime == Regime::IFTBU);
  CHECK(classify(2, 0.4, 0.6).regime == Regime::FTBU);
  CHECK(classify(2, 0.3, 0.9).regime == Regime::UNKNOWN);
  // exactly on the critical line: no classification
  CHECK(classify(2, 0.7, 0.7).regime == Regime::UNKNOWN);
  CHECK(classify(4, 1.5, 1.0).regime == Regime::UNKNOWN);
}

TEST_CASE("main condition evaluation", "[regime]") {
  const auto r1 = check_condition_1_4(3, 1.0, 1.0, 1.0);
  CHECK(r1.holds);
  REQUIRE(r1.lhs.has_value());
  CHECK(*r1.lhs == 0.0);

  const auto r2 = check_condition_1_4(3, 0.8, 0.5, 0.5);
  CHECK(r2.holds);
  CHECK(*r2.lhs == Catch::Approx(1.2 / 1.9).epsilon(1e-12));

  // denominator 2(m - q2) + 1 = 0 exactly, numerator positive: convention fails
  const auto r3 = check_condition_1_4(2, 0.2, 0.7, 0.7);
  CHECK_FALSE(r3.holds);
  CHECK(r3.denominator_clamped);
  CHECK_FALSE(r3.lhs.has_value());

  CHECK_THROWS_AS(check_condition_1_4(2, 0.5, -0.1, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_1_4(2, 0.5, 0.7, 0.4), std::invalid_argument);
}

TEST_CASE("clamped-denominator convention", "[regime]") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  int tested = 0;
  while (tested < 200) {
    const int n = (rng() % 2) ? 2 : 3;
    const double m = unif(rng);
    double q1 = std::abs(unif(rng)) + 1e-3;
    double q2 = q1 + std::abs(unif(rng));
    if (n * (m - q2) + 1.0 > 0.0) continue;
    const auto res = check_condition_1_4(n, m, q1, q2);
    const double M = std::max(q1, m + q1 - q2);
    CHECK(res.holds == (M >= 1.0));
    CHECK(res.denominator_clamped);
    ++tested;
  }
}

TEST_CASE("verdicts agree with the closed-form blow-up regions", "[regime]") {
  std::mt19937 rng(987);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = (trial % 2) ? 2 : 3;
    const double m = unif(rng);
    const double q = unif(rng);
    const auto v = classify(n, m, q);
    // exhaustive and exclusive by construction of the enum; cross-check FTBU
    if (q <= 0.0 || !(m - q < double(n - 2) / n)) {
      CHECK(v.regime != Regime::FTBU);
      continue;
    }
    bool expect;
    if (n == 2)
      expect = (q < 2.0 * m) || std::max(m, q) >= 1.0;
    else
      expect = (q < 2.0 * m - 2.0 / 3.0) || (m > 2.0 / 3.0) || std::max(m, q) >= 1.0;
    CHECK((v.regime == Regime::FTBU) == expect);
  }
}

TEST_CASE("certification of a planar prototype", "[regime]") {
  const auto m = MotilityModel::prototype(2, 1.0, 0.4, 0.6);
  const auto cert = kslab::certify_admissibility(m, 1e6, 400);
  CHECK(cert.cond_2_3);
  CHECK(cert.theta > 0.0);
  CHECK(cert.theta < 1.0);
  CHECK(cert.a > 0.0);
  REQUIRE(cert.b.has_value());
  CHECK(*cert.b > 0.0);
  CHECK(cert.max_residual <= 0.0);
  // certified prototypes satisfy m - q2 < (n-2)/n
  CHECK(m.params().m - m.params().q2 < 0.0);
}

TEST_CASE("certification of the log model lands on theta = 1/2", "[regime]") {
  const auto m = MotilityModel::prototype_log(1.0, 1.0);
  const auto cert = kslab::certify_admissibility(m, 1e6, 400);
  CHECK(std::abs(cert.theta - 0.5) < 0.1);
  // the envelope G(s) <= s (ln s)^(1/2) holds on the certified range
  for (int i = 0; i <= 20; ++i) {
    const double s = m.s0() * std::pow(1e4 / m.s0(), i / 20.0);
    CHECK(m.eval_G(s) <= s * std::sqrt(std::log(s)) * (1 + 1e-9));
  }
}

TEST_CASE("certification of a spatial prototype with m > q", "[regime]") {
  const auto m = MotilityModel::prototype(3, 1.0, 1.01, 1.0);
  const auto cert = kslab::certify_admissibility(m, 1e6, 400);
  CHECK(cert.theta > 2.0 / 3.0);
  CHECK(cert.theta < 1.0);
  REQUIRE(cert.vartheta.has_value());
  REQUIRE(cert.K.has_value());
  CHECK(*cert.vartheta > 0.0);
  CHECK(*cert.vartheta < 1.0);
  CHECK(cert.max_residual <= 0.0);
  CHECK(m.params().m - m.params().q2 < 1.0 / 3.0);
}

TEST_CASE("certification failure reports the violated inequality", "[regime]") {
  kslab::ModelParams p;
  p.n = 2;
  p.m = 1.0;
  p.q1 = p.q2 = 1.0;
  const auto bad = MotilityModel::custom(
      p, [](double s) { return 1.0 - 0.5 * s; }, [](double s) { return s; });
  CHECK_THROWS_AS(kslab::certify_admissibility(bad, 1e4, 200),
                  kslab::CertificationError);
  const auto good = MotilityModel::prototype(2, 1.0, 0.4, 0.6);
  CHECK_THROWS_AS(kslab::certify_admissibility(good, 1.0, 200),
                  std::invalid_argument);
  CHECK_THROWS_AS(kslab::certify_admissibility(good, 1e6, 10),
                  std::invalid_argument);
}

TEST_CASE("region scan reproduces pointwise classification", "[regime]") {
  const auto tiny = kslab::scan_region(2, {0.0, 1.0}, {0.0, 1.0}, 2);
  REQUIRE(tiny.verdicts.size() == 4);
  CHECK(tiny.at(0, 0).regime == classify(2, 0.0, 0.0).regime);
  CHECK(tiny.at(1, 0).regime == classify(2, 1.0, 0.0).regime);
  CHECK(tiny.at(0, 1).regime == classify(2, 0.0, 1.0).regime);
  CHECK(tiny.at(1, 1).regime == classify(2, 1.0, 1.0).regime);

  // planar map: the added wedge q < 2m below the diagonal is blow-up territory
  const auto planar = kslab::scan_region(2, {-1.0, 1.4}, {-1.0, 1.4}, 49);
  CHECK(planar.at(30, 35).regime == Regime::FTBU);  // (m, q) = (0.5, 0.75)

  // spatial map: (5/6, -0.6) sits below the diagonal, globally bounded
  const auto spatial = kslab::scan_region(3, {-1.0 / 6.0, 5.0 / 6.0}, {-0.6, 0.4}, 2);
  CHECK(spatial.at(1, 0).regime == Regime::GB);

  CHECK_THROWS_AS(kslab::scan_region(2, {0, 1}, {0, 1}, 1), std::invalid_argument);
}
