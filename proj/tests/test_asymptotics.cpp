#include <cmath>
#include <functional>

#include "doctest.h"
#include "oracles.hpp"
#include "singulib/asymptotics.hpp"
#include "singulib/expr.hpp"
#include "singulib/nonlinearity.hpp"

using namespace singulib;
using oracle::Real;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// f F e^{...} written as int_0^inf e^{-(a(s+x) - a(s))} dx, on a window long
// enough that the integrand has decayed below 1e-30.
Real scaled_F_oracle(const std::function<Real(Real)>& a, Real s, Real slope) {
  const Real as = a(s);
  return oracle::integrate([&](Real x) { return std::exp(-(a(s + x) - as)); }, 0.0L, 70.0L / slope, 400);
}

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("a_n for a = s^2 match the closed forms") {
    const ASequence seq = a_sequence(parse("s^2"), 2.0);
    CHECK(seq[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(seq[1] == doctest::Approx(-0.03125).epsilon(1e-15));
    CHECK(seq[2] == doctest::Approx(0.01171875).epsilon(1e-15));
    for (double s : {1.5, 2.0, 7.0, 30.0}) {
      const ASequence a = a_sequence(parse("s^2"), s);
      const double want[] = {1 / (2 * s), -1 / (4 * std::pow(s, 3)), 3 / (8 * std::pow(s, 5)),
                             -15 / (16 * std::pow(s, 7)), 105 / (32 * std::pow(s, 9))};
      for (int n = 0; n < 5; ++n) CHECK(rel(a[n], want[n]) <= 1e-10);
    }
  }

  TEST_CASE("a = s has a_1 = 1 and nothing else") {
    for (double s : {0.5, 3.0, 100.0}) {
      const ASequence a = a_sequence(parse("s"), s);
      CHECK(a[0] == 1.0);
      for (int n = 1; n < 5; ++n) CHECK(a[n] == 0.0);
    }
  }

  TEST_CASE("a = e^s against nested finite differences of the recursion") {
    // a_1 = 1/a', a_{n+1} = a_n' / a', each derivative by Richardson differences.
    std::function<Real(Real)> level = [](Real s) { return std::exp(-s); };
    std::vector<Real> want{level(3.0L)};
    for (int n = 1; n < 5; ++n) {
      auto prev = level;
      level = [prev](Real s) { return oracle::fd_derivative(prev, s, 1, 0.02L) / std::exp(s); };
      want.push_back(level(3.0L));
    }
    const ASequence a = a_sequence(parse("exp(s)"), 3.0);
    for (int n = 0; n < 5; ++n) CHECK_MESSAGE(rel(a[n], static_cast<double>(want[n])) <= 1e-6, "n = ", n + 1);
  }

  TEST_CASE("F_tail brackets the exact value for f = s^-3 e^{s^2}") {
    const TailEstimate t = F_tail(parse("s^2 - 3*log(s)"), 3.0);
    const double exact = 5.0 * std::exp(-9.0);
    CHECK(std::abs(t.value - exact) <= t.err_estimate);
    CHECK(t.err_estimate < 0.05 * exact);
    CHECK(t.log_value == doctest::Approx(std::log(t.value)).epsilon(1e-14));
  }

  TEST_CASE("F_tail is exact for the pure exponential") {
    const TailEstimate t = F_tail(parse("s"), 10.0);
    CHECK(rel(t.value, std::exp(-10.0)) <= 1e-15);
    CHECK(t.err_estimate == 0.0);
    CHECK(t.scaled == 1.0);
  }

  TEST_CASE("F_tail for a = e^s against quadrature") {
    const Real exact = oracle::integrate([](Real x) { return std::exp(-std::exp(x)); }, 4.0L, 8.0L, 400);
    const TailEstimate t = F_tail(parse("exp(s)"), 4.0);
    // Four terms leave the a_5 term, 24 e^{-16} ~ 2.7e-6 relative, so the
    // truncation error itself is what gets compared here.
    CHECK(std::abs(t.value - static_cast<double>(exact)) <= t.err_estimate);
    CHECK(rel(t.value, static_cast<double>(exact)) <= 5e-6);
    const ASequence a = a_sequence(parse("exp(s)"), 4.0);
    const double five_terms = (a[0] + a[1] + a[2] + a[3] + a[4]) * std::exp(-std::exp(4.0));
    CHECK(rel(five_terms, static_cast<double>(exact)) <= 5e-7);  // next term 120 e^{-20}
  }

  TEST_CASE("tail guard refuses non-asymptotic points") {
    CHECK_THROWS_AS(F_tail(parse("s^2"), 0.5), Error);
  }

  TEST_CASE("expansion ratios") {
    const ExpansionRatios sq = expansion_ratios(parse("s^2"), 5.0);
    CHECK(std::abs(sq.fpF - (1.0 - 0.02 + 0.0012)) <= 2e-4);

    const ExpansionRatios lin = expansion_ratios(parse("s"), 4.0);
    CHECK(lin.logF == -4.0);
    CHECK(lin.fF == 1.0);
    CHECK(lin.fpF == 1.0);
    CHECK(lin.ffppF_over_fp == 1.0);

    // a = s^2 + s at s = 6: f' = a' f, so f'F = a'(6) * (f F).
    auto a = [](Real s) { return s * s + s; };
    const Real fpF = 13.0L * scaled_F_oracle(a, 6.0L, 13.0L);
    CHECK(std::abs(expansion_ratios(parse("s^2 + s"), 6.0).fpF - static_cast<double>(fpF)) <= 5e-3);
  }

  TEST_CASE("successive a_n ratios shrink for every built-in family") {
    for (const FamilySpec& spec : {FamilySpec::power_exp(2, 1), FamilySpec::sum_exp(2, 0.5), FamilySpec::log_exp(2, 1),
                                   FamilySpec::iter_exp(1), FamilySpec::model(2)}) {
      const Nonlinearity nl = Nonlinearity::make(spec);
      for (int n = 0; n < 4; ++n) {
        double prev = INFINITY;
        for (double s = 10.0; s <= 40.0; s += 2.0) {
          const ASequence a = a_sequence(nl.exponent(), s);
          const double ratio = std::abs(a[n + 1] / a[n]);
          CHECK_MESSAGE(ratio < prev, nl.describe(), " n = ", n + 1, " s = ", s);
          prev = ratio;
        }
        CHECK(prev < 0.1);
      }
    }
  }

  TEST_CASE("four-term tail against quadrature for s^q + r log s") {
    for (double r : {-3.0, 0.0, 1.0}) {
      auto a = [r](Real s) { return s * s + r * std::log(s); };
      for (double s = 6.0; s <= 12.0; s += 1.0) {
        Expression e = parse("s^2 + " + std::to_string(r) + "*log(s)");
        const TailEstimate t = F_tail(e, s);
        const ASequence seq = a_sequence(e, s);
        const Real quad = scaled_F_oracle(a, s, 2 * s + r / s);
        CHECK(rel(t.scaled, static_cast<double>(quad)) <= 3.0 * std::abs(seq[3] / seq[0]));
      }
    }
  }

  TEST_CASE("f'F lies in (0, 1] and rises toward 1") {
    for (const char* src : {"s^2 + log(s)", "s^3", "s^1.5 + 2*log(s)", "s^2 + s^0.5"}) {
      double prev = 0.0;
      for (double s = 10.0; s <= 40.0; s += 3.0) {
        const double v = expansion_ratios(parse(src), s).fpF;
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(v > prev);
        prev = v;
      }
    }
  }

  TEST_CASE("series functionals keep precision where 1 - f'F is tiny") {
    // a = s^2: H ~ 1/(2s) - 1/(4s^3) and D = 1 - f'F ~ 1/(2 s^2)
    const SeriesFunctionals sf = series_functionals(eval_jet(parse("s^2"), 1e5, 5));
    CHECK(sf.D > 0.0);
    CHECK(rel(sf.D, 1.0 / (2.0 * 1e10)) <= 1e-8);
    CHECK(rel(sf.H, 0.5e-5 - 0.25e-15) <= 1e-14);
  }
}
