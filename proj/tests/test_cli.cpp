#include <sstream>

#include "doctest.h"
#include "singulib/pipeline.hpp"

using namespace singulib;
using nlohmann::json;

namespace {

std::string config_error(const std::string& text) {
  try {
    run_config_from_json(json::parse(text));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing") {
    const RunConfig bare = run_config_from_json(json::parse(R"({"family":"iter_exp","q":1})"));
    CHECK(bare.nonlinearity.family == Family::IterExp);

    const RunConfig full = run_config_from_json(json::parse(R"({
      "nonlinearity": {"family": "power_exp", "q": 2, "r": 1},
      "construct": {"rho0": 9, "rho_max": 5000, "tol": 1e-9},
      "shoot": {"r0": 0.02},
      "verify": {"sigma_list": [0.1, 0.2], "bumps": [{"radius_fraction": 0.5, "power": 3}]},
      "threads": 2})"));
    CHECK(full.construct.rho0 == 9.0);
    CHECK(full.construct.rho_max == 5000.0);
    CHECK(full.construct.tol == 1e-9);
    CHECK(full.r0.value() == 0.02);
    CHECK(full.sigma_list.size() == 2);
    CHECK(full.bumps.size() == 1);
    CHECK(full.threads == 2);

    // The resolved form parses back to the same thing.
    CHECK(to_json(run_config_from_json(to_json(full))) == to_json(full));
  }

  TEST_CASE("config diagnostics name the field") {
    CHECK(config_error(R"({"nonlinearity":{"family":"power_exp","q":2,"r":1},"construct":{"rho_0":3}})")
              .find("config.construct.rho_0") != std::string::npos);
    CHECK(config_error(R"({"nonlinearity":{"family":"power_exp","q":2,"r":1},"construct":{"tol":"x"}})")
              .find("config.construct.tol") != std::string::npos);
    CHECK(config_error(R"({"construct":{}})").find("config.nonlinearity") != std::string::npos);
    CHECK(config_error(R"([1,2])").find("config") != std::string::npos);
  }

  TEST_CASE("demo configurations") {
    CHECK(demo_config("example3.1", std::nullopt, std::nullopt).nonlinearity.family == Family::PowerExp);
    CHECK(demo_config("example3.2", 2.0, 0.5).nonlinearity.r == 0.5);
    CHECK(demo_config("example3.3", 2.0, 1.0).nonlinearity.family == Family::LogExp);
    CHECK(demo_config("example3.4", 2.0, std::nullopt).nonlinearity.q == 2.0);
    CHECK_THROWS_AS(demo_config("example3.4", 1.0, 1.0), Error);
    CHECK_THROWS_AS(demo_config("example9", std::nullopt, std::nullopt), Error);
  }

  TEST_CASE("a failed hypothesis stops before construction") {
    const PipelineResult r = run_pipeline(demo_config("example3.3", 2.0, 1.0), Stage::Verify);
    CHECK(r.hypothesis_failed);
    CHECK_FALSE(r.profile.has_value());
    CHECK(report_json(r, Stage::Verify)["hypothesis_failed"] == true);
  }

  TEST_CASE("construct stage report and CSV") {
    RunConfig c = demo_config("example3.1", 2.0, 1.0);
    c.construct.rho_max = 2000.0;
    const PipelineResult r = run_pipeline(c, Stage::Construct);
    REQUIRE(r.profile.has_value());
    const json j = report_json(r, Stage::Construct);
    CHECK(j["config"] == to_json(r.config));
    CHECK(j.contains("correction"));
    CHECK_FALSE(j.contains("dirichlet"));
    CHECK(report_json(run_pipeline(c, Stage::Construct), Stage::Construct).dump() == j.dump());

    std::ostringstream os;
    write_profile_csv(os, *r.profile, &r.residual->per_node);
    const std::string csv = os.str();
    CHECK(csv.rfind("r,rho,u,u_prime,phi,eta,residual,segment\r\n", 0) == 0);
    std::size_t lines = 0;
    for (std::size_t at = csv.find("\r\n"); at != std::string::npos; at = csv.find("\r\n", at + 2)) ++lines;
    CHECK(lines == r.profile->nodes.size() + 1);
    CHECK(csv.find("inner_constructed") != std::string::npos);
    CHECK(csv.find("nan") == std::string::npos);

    // Missing values (no phi/eta on shot nodes, no residual) are empty fields.
    RadialProfile shot;
    ProfileNode n;
    n.rho = 1.5;
    n.u = 0.25;
    n.u_rho = 0.125;
    n.segment = Segment::OuterShot;
    shot.nodes.push_back(n);
    std::ostringstream one;
    write_profile_csv(one, shot);
    const std::string row = one.str().substr(one.str().find("\r\n") + 2);
    CHECK(row.find(",0.25,") != std::string::npos);
    CHECK(row.find(",,,,outer_shot\r\n") != std::string::npos);
  }
}
