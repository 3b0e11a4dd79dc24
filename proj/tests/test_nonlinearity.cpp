#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "singulib/numerics.hpp"
#include "singulib/nonlinearity.hpp"

using namespace singulib;
using oracle::Real;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<FamilySpec> all_families() {
  return {FamilySpec::power_exp(2, 1),  FamilySpec::power_exp(2, -3), FamilySpec::power_exp(3, 0),
          FamilySpec::power_exp(1.5, 2), FamilySpec::sum_exp(2, 0.5),  FamilySpec::log_exp(2, 1),
          FamilySpec::iter_exp(1),       FamilySpec::model(2),         FamilySpec::model(1),
          FamilySpec::model(3)};
}

}  // namespace

TEST_SUITE("nonlinearity") {
  TEST_CASE("make produces the documented f") {
    const Nonlinearity g2 = Nonlinearity::make(FamilySpec::model(2));
    const Nonlinearity g1 = Nonlinearity::make(FamilySpec::model(1));
    const Nonlinearity pe = Nonlinearity::make(FamilySpec::power_exp(2, 1));
    for (double s : {1.5, 2.0, 3.7, 6.0}) {
      CHECK(rel(g2.f(s), std::pow(s, -3.0) * std::exp(s * s)) <= 1e-13);
      CHECK(rel(g1.f(s), 4.0 * std::exp(std::exp(s)) / std::exp(2.0 * s)) <= 1e-12);
      CHECK(rel(pe.f(s), s * std::exp(s * s)) <= 1e-13);
      CHECK(rel(pe.f_prime(s), (1.0 + 2.0 * s * s) * std::exp(s * s)) <= 1e-13);
    }
    CHECK(g2.known_B().value() == 2.0);
    CHECK(pe.known_B().value() == 2.0);
    CHECK(Nonlinearity::make(FamilySpec::iter_exp(1)).known_B().value() == 1.0);
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(Nonlinearity::make(FamilySpec::power_exp(1.0, 1)), Error);
    CHECK_THROWS_AS(Nonlinearity::make(FamilySpec::model(0.5)), Error);
    CHECK_THROWS_AS(Nonlinearity::make(FamilySpec::custom("s^2 - 10*s", 1.0)), Error);  // f' < 0 near s0
    CHECK_THROWS_AS(Nonlinearity::make(FamilySpec::custom("log(s)", -1.0)), Error);
  }

  TEST_CASE("family JSON round trip and diagnostics") {
    const auto j = nlohmann::json::parse(R"({"family":"power_exp","q":2,"r":1})");
    const FamilySpec spec = family_spec_from_json(j);
    CHECK(spec.family == Family::PowerExp);
    CHECK(spec.q == 2.0);
    CHECK(family_spec_from_json(to_json(spec)).r == 1.0);
    try {
      family_spec_from_json(nlohmann::json::parse(R"({"family":"power_exp","q":2,"rr":1})"));
      FAIL("unknown key accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      CHECK(std::string(e.what()).find("nonlinearity.rr") != std::string::npos);
    }
    CHECK_THROWS_AS(family_spec_from_json(nlohmann::json::parse(R"({"family":"nope"})")), Error);
  }

  TEST_CASE("extension below s0 is C1, positive and increasing") {
    for (const FamilySpec& spec : all_families()) {
      const Nonlinearity nl = Nonlinearity::make(spec);
      const double s0 = nl.s0(), h = 1e-7 * std::max(1.0, s0);
      CHECK(rel(nl.f_extended(s0 - h), nl.f(s0 + h)) <= 1e-5);
      const double left = (nl.f_extended(s0) - nl.f_extended(s0 - h)) / h;
      const double right = (nl.f(s0 + h) - nl.f(s0)) / h;
      CHECK(rel(left, right) <= 1e-4);
      double prev = 0.0;
      for (double s = 0.0; s <= s0; s += s0 / 20) {
        CHECK(nl.f_extended(s) > prev);
        prev = nl.f_extended(s);
      }
    }
  }

  TEST_CASE("F closed forms") {
    const TransformF g(Nonlinearity::make(FamilySpec::model(2)));
    CHECK(rel(g.F_of(2.0), 2.5 * std::exp(-4.0)) <= 1e-12);
    CHECK(rel(g.F_of(2.0), 4.5789097e-2) <= 1e-7);
    const TransformF e(Nonlinearity::make(FamilySpec::custom("s")));
    CHECK(rel(e.F_of(3.0), std::exp(-3.0)) <= 1e-13);
    CHECK(e.F_inv(std::exp(-3.0)) == doctest::Approx(3.0).epsilon(1e-13));
  }

  TEST_CASE("F for s e^{s^2} against brute-force Gauss panels") {
    // F(3) = int_0^inf 2u e^{-a(3 + u^2)} du, scaled by e^{a(3)}.
    auto a = [](Real s) { return s * s + std::log(s); };
    const Real scaled =
        oracle::integrate([&](Real u) { return 2 * u * std::exp(-(a(3 + u * u) - a(3.0L))); }, 0.0L, 3.0L, 300);
    const TransformF t(Nonlinearity::make(FamilySpec::power_exp(2, 1)));
    CHECK(rel(t.F_of(3.0), static_cast<double>(scaled * std::exp(-a(3.0L)))) <= 1e-9);
    CHECK(rel(t.log_F(3.0), static_cast<double>(std::log(scaled) - a(3.0L))) <= 1e-12);
  }

  TEST_CASE("F for the double exponential against quadrature") {
    const TransformF t(Nonlinearity::make(FamilySpec::iter_exp(1)));
    for (double s : {0.5, 1.0, 2.0, 3.0}) {
      auto a = [](Real x) { return std::exp(x); };
      const Real scaled =
          oracle::integrate([&](Real x) { return std::exp(-(a(s + x) - a(s))); }, 0.0L, 6.0L, 600);
      CHECK(rel(t.log_F(s), static_cast<double>(std::log(scaled) - a(s))) <= 1e-12);
    }
  }

  TEST_CASE("inversion round trips") {
    const TransformF g(Nonlinearity::make(FamilySpec::model(2)));
    for (double s : {2.0, 5.0, 10.0}) CHECK(std::abs(g.F_inv(g.F_of(s)) - s) <= 1e-9);
    // F = G for the model, so F^{-1}((B/4) rho e^{1-rho}) = sqrt(rho - 1).
    CHECK(std::abs(g.F_inv(0.5 * 10.0 * std::exp(-9.0)) - 3.0) <= 1e-9);
    CHECK(std::abs(g.F_inv_log(std::log(0.5 * 1e4) + 1.0 - 1e4) - std::sqrt(9999.0)) <= 1e-9);
    const TransformF pe(Nonlinearity::make(FamilySpec::power_exp(2, 1)));
    for (double s : {0.3, 1.0, 4.0, 30.0, 300.0}) CHECK(rel(pe.F_inv_log(pe.log_F(s)), s) <= 1e-12);
  }

  TEST_CASE("F decreasing, fF non-increasing, f'F rising to 1") {
    for (const FamilySpec& spec : all_families()) {
      const TransformF t(Nonlinearity::make(spec));
      const Nonlinearity& nl = t.nonlinearity();
      const std::string name = nl.describe();
      // (fF)' = f'F - 1 = -D: fF can rise only where f'F > 1, which some
      // members do close to s0. From s = 2 on it must not rise.
      double prevF = INFINITY, prevH = INFINITY, prevD = 0.0;
      for (double s : geometric_grid(std::max(1.5 * nl.s0(), 0.5), 40.0, 50)) {
        const Functionals fn = t.functionals(s);
        CHECK_MESSAGE(fn.logF < prevF, name, " s = ", s);
        if (fn.H > prevH * (1 + 1e-12)) {
          CHECK_MESSAGE(s < 2.0, name, " s = ", s);
          CHECK_MESSAGE((fn.D < 0.0 || prevD < 0.0), name, " s = ", s);
        }
        prevF = fn.logF;
        prevH = fn.H;
        prevD = fn.D;
        if (fn.jet[0] > 700.0) break;
      }
      double prevA = 0.0;
      for (double s = 10.0; s <= 40.0; s += 2.0) {
        const Functionals fn = t.functionals(s);
        const double fpF = 1.0 - fn.D;
        CHECK_MESSAGE(fpF <= 1.0 + 1e-9, name);
        CHECK_MESSAGE(fpF >= prevA, name, " s = ", s);
        prevA = fpF;
      }
      CHECK(prevA > 0.99);
    }
  }

  TEST_CASE("quadrature and series routes agree where both apply") {
    const TransformF t(Nonlinearity::make(FamilySpec::power_exp(2, 1)));
    for (double s : {8.0, 15.0, 25.0}) {
      const Functionals fn = t.functionals(s);
      double err = 0.0;
      const double q = t.scaled_F_quadrature(s, &err);
      CHECK(rel(q, fn.H) <= 1e-12);
      CHECK(err <= 1e-12 * q);
    }
  }
}
