#include <cmath>

#include "doctest.h"
#include "singulib/construct.hpp"
#include "singulib/shoot.hpp"
#include "singulib/verify.hpp"

using namespace singulib;

namespace {

struct Run {
  TransformF t;
  ModelProblem m;
  RadialProfile full;
};

Run run(const FamilySpec& spec, double B, double rho0) {
  TransformF t(Nonlinearity::make(spec));
  const ModelProblem m = build_model(B);
  ConstructOptions o;
  o.rho0 = rho0;
  o.rho_max = 1e4;
  RadialProfile inner = assemble_inner(solve_correction(t, m, o));
  const ProfileNode& e = inner.nodes.back();
  const DirichletResult d =
      find_dirichlet_radius(t.nonlinearity(), static_cast<double>(e.r()), e.u, static_cast<double>(e.u_prime()));
  RadialProfile full = assemble_full(inner, d);
  return {std::move(t), m, std::move(full)};
}

const Run& model_run() {
  static const Run r = run(FamilySpec::model(2), 2.0, 5.5);
  return r;
}

const Run& pe_run() {
  static const Run r = run(FamilySpec::power_exp(2, 1), 2.0, ef_map(0.05));
  return r;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("residual of the explicit model solution") {
    const ModelProblem m = build_model(2.0);
    const RadialProfile p = model_profile(m, make_ef_grid(5.5, 1e4, 2.0).rho);
    const ResidualResult r = ode_residual(p, m.as_nonlinearity());
    CHECK(r.max_rel <= 1e-9);
    CHECK(r.per_node.size() == p.nodes.size());
    CHECK(ode_residual(model_run().full, model_run().t.nonlinearity()).max_rel <= 1e-9);
  }

  TEST_CASE("residual detector catches an injected perturbation") {
    const ModelProblem m = build_model(2.0);
    RadialProfile p = model_profile(m, make_ef_grid(5.5, 1e4, 2.0).rho);
    for (ProfileNode& n : p.nodes) {
      n.u += 0.01 * std::sin(5.0 * n.rho);
      n.u_rho += 0.05 * std::cos(5.0 * n.rho);
    }
    CHECK(ode_residual(p, m.as_nonlinearity()).max_rel >= 1e-2);
  }

  TEST_CASE("constructed power_exp(2,1) residual") {
    const ResidualResult r = ode_residual(pe_run().full, pe_run().t.nonlinearity());
    CHECK(r.max_rel <= 1e-5);
    CHECK(r.outer_max > 0.0);
  }

  TEST_CASE("interpolant reproduces the model between nodes") {
    const ModelProblem m = build_model(2.0);
    const RadialProfile p = model_profile(m, make_ef_grid(5.5, 1e4, 2.0).rho);
    const ProfileInterpolant ip(p, m.as_nonlinearity());
    for (double rho : {5.77, 13.3, 101.7, 2345.6, 9876.5}) {
      double u = 0.0, u_rho = 0.0;
      ip.eval(rho, u, u_rho);
      CHECK(std::abs(u - m.psi(rho)) <= 1e-10 * m.psi(rho));
      CHECK(std::abs(u_rho - m.psi_prime(rho)) <= 1e-7 * m.psi_prime(rho));
    }
  }

  TEST_CASE("expansion fits") {
    const auto pe_main = main_term(FamilySpec::power_exp(2, 1));
    REQUIRE(pe_main.has_value());
    CHECK(pe_main->expected_order == doctest::Approx(1.5));
    // Main term at X = 100: (X - 2 log X)^{1/2}.
    CHECK(pe_main->u(101.0) == doctest::Approx(std::sqrt(100.0 - 2.0 * std::log(100.0))).epsilon(1e-14));
    const ExpansionFit f = expansion_compare(pe_run().full, *pe_main);
    CHECK(f.pass);
    CHECK(f.alpha >= 1.35);
    CHECK(f.alpha <= 1.65);
    CHECK(std::abs(f.alpha_half_window - f.alpha) <= 0.1);

    const auto g = main_term(FamilySpec::model(2));
    REQUIRE(g.has_value());
    const ExpansionFit fg = expansion_compare(model_run().full, *g);
    CHECK(fg.skipped);
    CHECK(fg.pass);
    CHECK(fg.max_abs_dev <= 1e-12);

    const auto ie = main_term(FamilySpec::iter_exp(1));
    REQUIRE(ie.has_value());
    CHECK(ie->expected_order == 2.0);
    CHECK(ie->log_factor);
    CHECK_FALSE(main_term(FamilySpec::log_exp(2, 1)).has_value());
  }

  TEST_CASE("distributional test on the model") {
    const Run& r = model_run();
    const double R = *r.full.R;
    for (const BumpTest& b : {BumpTest{0.3 * R, 3, 1.0}, BumpTest{0.6 * R, 4, 1.0}, BumpTest{0.9 * R, 5, 1.0}}) {
      const DistributionalRecord d = distributional_test(r.full, r.t.nonlinearity(), 2.0, b);
      CHECK(d.monotone);
      CHECK(std::abs(d.alpha - 0.5) <= 0.1);
      CHECK(std::abs(d.J0) <= 1e-6 * d.scale);
      CHECK(d.max_identity_gap <= 1e-8);
      CHECK(d.pass);
      for (std::size_t i = 1; i < d.samples.size(); ++i) CHECK(std::abs(d.samples[i].J) < std::abs(d.samples[i - 1].J));
    }
    const DistributionalRecord zero = distributional_test(r.full, r.t.nonlinearity(), 2.0, BumpTest{0.5 * R, 3, 0.0});
    for (const auto& s : zero.samples) CHECK(s.J == 0.0);
  }

  TEST_CASE("bounds") {
    const Run& r = model_run();
    const auto checks = bound_checks(r.full, r.t.nonlinearity(), 2.0, {0.1});
    REQUIRE(checks.size() == 3);
    for (const BoundCheck& b : checks) CHECK_MESSAGE(b.verdict == BoundVerdict::Holds, b.name);
    // Pure function of the stored samples.
    const auto again = bound_checks(r.full, r.t.nonlinearity(), 2.0, {0.1});
    for (std::size_t i = 0; i < checks.size(); ++i) {
      CHECK(again[i].worst == checks[i].worst);
      CHECK(again[i].rho_onset == checks[i].rho_onset);
    }
    const auto pe = bound_checks(pe_run().full, pe_run().t.nonlinearity(), 2.0, {0.1, 0.2});
    CHECK(pe.size() == 6);
    for (const BoundCheck& b : pe) CHECK_MESSAGE(b.verdict == BoundVerdict::Holds, b.name, " sigma ", b.sigma);
  }

  TEST_CASE("fF band") {
    const FFBand pe = ff_band(TransformF(Nonlinearity::make(FamilySpec::power_exp(2, 1))), build_model(2.0));
    CHECK(pe.pass);
    CHECK(pe.ratio <= 10.0);
    CHECK(pe.min > 0.0);
    const FFBand ie = ff_band(TransformF(Nonlinearity::make(FamilySpec::iter_exp(1))), build_model(1.0));
    CHECK(ie.pass);
  }

  TEST_CASE("energy trend and report") {
    const auto e = energy_trend(pe_run().full);
    REQUIRE(e.size() >= 2);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i].second >= e[i - 1].second);
    VerificationReport rep;
    rep.residual = ode_residual(pe_run().full, pe_run().t.nonlinearity());
    rep.energy = e;
    const nlohmann::json j = to_json(rep);
    CHECK(j.contains("residual_max_rel"));
  }
}
