#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "singulib/expr.hpp"

using namespace singulib;

namespace {

NodePtr leaf_var() { return std::make_shared<Node>(Node{NodeKind::Variable, 0.0, nullptr, nullptr, 0}); }
NodePtr leaf_const(double v) { return std::make_shared<Node>(Node{NodeKind::Constant, v, nullptr, nullptr, 0}); }
NodePtr node(NodeKind k, NodePtr a, NodePtr b = nullptr, double v = 0.0) {
  return std::make_shared<Node>(Node{k, v, std::move(a), std::move(b), 0});
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("exprdsl") {
  TEST_CASE("parse builds the expected trees") {
    const Expression sq = parse("s^2");
    CHECK(same_tree(sq, Expression(node(NodeKind::Pow, leaf_var(), nullptr, 2.0))));

    const Expression e = parse("s^2 - 3*log(s)");
    const Expression want(node(NodeKind::Sub, node(NodeKind::Pow, leaf_var(), nullptr, 2.0),
                               node(NodeKind::Mul, leaf_const(3.0), node(NodeKind::Log, leaf_var()))));
    CHECK(same_tree(e, want));
    CHECK(e.contains_log());
    CHECK_FALSE(sq.contains_log());
  }

  TEST_CASE("parse errors carry the byte offset") {
    try {
      parse("exp(s");
      FAIL("expected a parse error");
    } catch (const ParseError& err) {
      CHECK(err.offset() == 5);
      CHECK(err.message() == "unbalanced parenthesis");
      CHECK(err.kind() == ErrorKind::Syntax);
    }
    CHECK_THROWS_AS(parse("s^(s)"), ParseError);
    CHECK_THROWS_AS(parse("s + "), ParseError);
    CHECK_THROWS_AS(parse("sin(s)"), ParseError);
    CHECK_THROWS_AS(parse("s)"), ParseError);
  }

  TEST_CASE("print then parse reproduces the tree") {
    for (const char* src : {"s^2 - 3*log(s)", "exp(s^1.5) + s", "-s + 2", "s^2*log(s)^-1.5 / (1 + s)",
                            "log(exp(s) - 2*s + 1.3862943611198906)", "s^-0.5 - -2"}) {
      const Expression a = parse(src);
      const Expression b = parse(a.print());
      CHECK_MESSAGE(same_tree(a, b), src);
      CHECK(parse(b.print()).print() == a.print());
    }
  }

  TEST_CASE("jets of elementary expressions") {
    const Jet j = eval_jet(parse("s^2"), 2.0, 2);
    CHECK(j[0] == 4.0);
    CHECK(j[1] == 4.0);
    CHECK(j[2] == 2.0);

    const Jet e = eval_jet(parse("exp(s)"), 1.0, 5);
    for (int k = 0; k <= 5; ++k) CHECK(rel(e[k], std::exp(1.0)) <= 1e-15);
  }

  TEST_CASE("jet arithmetic is exact on polynomials") {
    // p(s) = (s + 1)^2 (2 s - 3) = 2 s^3 + s^2 - 4 s - 3
    const Jet j = eval_jet(parse("(s + 1)*(s + 1)*(2*s - 3)"), 1.5, 5);
    const double s = 1.5;
    CHECK(j[0] == doctest::Approx(2 * s * s * s + s * s - 4 * s - 3).epsilon(1e-15));
    CHECK(j[1] == doctest::Approx(6 * s * s + 2 * s - 4).epsilon(1e-15));
    CHECK(j[2] == doctest::Approx(12 * s + 2).epsilon(1e-15));
    CHECK(j[3] == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(j[4] == 0.0);
    CHECK(j[5] == 0.0);
  }

  TEST_CASE("s^2 log s against Richardson finite differences") {
    auto a = [](oracle::Real s) { return s * s * std::log(s); };
    const Jet j = eval_jet(parse("s^2*log(s)"), 3.0, 4);
    for (int k = 1; k <= 4; ++k) {
      const double fd = static_cast<double>(oracle::fd_derivative(a, 3.0L, k, 0.05L));
      CHECK_MESSAGE(rel(j[k], fd) <= 1e-7, "order ", k);
    }
  }

  TEST_CASE("family exponents against hand-derived derivatives") {
    std::mt19937 gen(20261019);
    std::uniform_real_distribution<double> pick(2.0, 50.0);
    for (int i = 0; i < 20; ++i) {
      const double s = pick(gen);
      // s^q + r log s with q = 2.5, r = -3
      const Jet p = eval_jet(parse("s^2.5 - 3*log(s)"), s, 5);
      double falling = 1.0, fact = 1.0;
      for (int k = 1; k <= 5; ++k) {
        falling *= 2.5 - (k - 1);
        if (k > 1) fact *= (k - 1);
        const double want = falling * std::pow(s, 2.5 - k) - 3.0 * ((k % 2) ? 1.0 : -1.0) * fact * std::pow(s, -k);
        CHECK(rel(p[k], want) <= 1e-10);
      }
      // e^{s^2} restricted to moderate s
      const double t = 2.0 + (s - 2.0) / 16.0;
      const Jet q = eval_jet(parse("exp(s^2)"), t, 5);
      const double g = std::exp(t * t);
      const double want[] = {g, 2 * t * g, (2 + 4 * t * t) * g, (12 * t + 8 * t * t * t) * g,
                             (12 + 48 * t * t + 16 * std::pow(t, 4)) * g,
                             (120 * t + 160 * std::pow(t, 3) + 32 * std::pow(t, 5)) * g};
      for (int k = 0; k <= 5; ++k) CHECK(rel(q[k], want[k]) <= 1e-10);
    }
  }

  TEST_CASE("evaluation failures are values") {
    auto res = try_eval_jet(parse("log(s - 5)"), 2.0, 3);
    REQUIRE(std::holds_alternative<EvalError>(res));
    CHECK(std::get<EvalError>(res).kind == ErrorKind::Domain);
    CHECK(std::get<EvalError>(res).offset == 0);

    auto div = try_eval_jet(parse("1/(s - 2)"), 2.0, 1);
    REQUIRE(std::holds_alternative<EvalError>(div));
    CHECK(std::get<EvalError>(div).kind == ErrorKind::DivisionByZero);

    auto big = try_eval_jet(parse("exp(exp(s))"), 10.0, 1);
    REQUIRE(std::holds_alternative<EvalError>(big));
    CHECK(std::get<EvalError>(big).kind == ErrorKind::Overflow);

    CHECK_THROWS_AS(eval_jet(parse("log(s)"), -1.0, 2), Error);
  }
}
