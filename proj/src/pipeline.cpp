#include "singulib/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "singulib/error.hpp"
#include "singulib/log.hpp"
#include "singulib/numerics.hpp"

namespace singulib {

namespace {

using nlohmann::json;

constexpr const char* kExtensionNote = "linear continuation of log f below s0";

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Config, path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) config_error(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) config_error(path + "." + it.key(), "unknown key");
  }
}

double get_number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) config_error(path + "." + key, "expected a number");
  return j[key].get<double>();
}

double get_positive(const json& j, const std::string& path, const char* key, double fallback) {
  const double v = get_number(j, path, key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) config_error(path + "." + key, "must be a positive number");
  return v;
}

int get_int(const json& j, const std::string& path, const char* key, int fallback, int min_value) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) config_error(path + "." + key, "expected an integer");
  const int v = j[key].get<int>();
  if (v < min_value) config_error(path + "." + key, "must be at least " + std::to_string(min_value));
  return v;
}

std::vector<double> get_positive_list(const json& j, const std::string& path, const char* key,
                                      std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array()) config_error(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j[key].size(); ++i) {
    const auto& v = j[key][i];
    const std::string p = path + "." + key + "[" + std::to_string(i) + "]";
    if (!v.is_number()) config_error(p, "expected a number");
    if (!(v.get<double>() > 0.0)) config_error(p, "must be positive");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string fmt_long(long double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<long double>::max_digits10) << v;
  return os.str();
}

json profile_summary(const RadialProfile& p) {
  json j;
  j["nodes"] = p.nodes.size();
  j["inner_nodes"] = p.count(Segment::InnerConstructed);
  j["outer_nodes"] = p.count(Segment::OuterShot);
  j["r0"] = p.r0;
  j["rho0"] = p.rho0;
  j["R"] = p.R ? json(*p.R) : json(nullptr);
  j["notes"] = p.notes;
  return j;
}

}  // namespace

RunConfig::RunConfig() {
  nonlinearity = FamilySpec::power_exp(2.0, 1.0);
  for (double L : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0}) eps_list.push_back(std::exp(-L));
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) config_error("config", "expected an object");
  if (j.contains("family")) {
    c.nonlinearity = family_spec_from_json(j, "config");
    return c;
  }
  check_keys(j, "config", {"nonlinearity", "classify", "construct", "shoot", "verify", "threads"});
  if (!j.contains("nonlinearity")) config_error("config.nonlinearity", "missing");
  c.nonlinearity = family_spec_from_json(j["nonlinearity"], "config.nonlinearity");

  if (j.contains("classify")) {
    const std::string p = "config.classify";
    const json& s = j["classify"];
    check_keys(s, p, {"B", "points", "a_max", "rho_min", "rho_max", "per_decade"});
    if (s.contains("B") && !s["B"].is_null()) c.B_override = get_number(s, p, "B", 0.0);
    if (c.B_override && *c.B_override < 1.0) config_error(p + ".B", "must be at least 1");
    c.estimate.points = static_cast<std::size_t>(get_int(s, p, "points", static_cast<int>(c.estimate.points), 8));
    c.estimate.a_max = get_positive(s, p, "a_max", c.estimate.a_max);
    c.hypothesis.rho_min = get_positive(s, p, "rho_min", c.hypothesis.rho_min);
    c.hypothesis.rho_max = get_positive(s, p, "rho_max", c.hypothesis.rho_max);
    c.hypothesis.per_decade =
        static_cast<std::size_t>(get_int(s, p, "per_decade", static_cast<int>(c.hypothesis.per_decade), 2));
    if (c.hypothesis.rho_max < 1000.0 * c.hypothesis.rho_min) {
      config_error(p + ".rho_max", "must be at least 1000 * rho_min");
    }
  }
  if (j.contains("construct")) {
    const std::string p = "config.construct";
    const json& s = j["construct"];
    check_keys(s, p, {"rho0", "rho_max", "tol", "max_iterations", "nodes_per_period", "max_escalations",
                      "escalation_factor"});
    c.construct.rho0 = get_positive(s, p, "rho0", c.construct.rho0);
    if (c.construct.rho0 <= 1.0) config_error(p + ".rho0", "must exceed 1");
    c.construct.rho_max = get_positive(s, p, "rho_max", c.construct.rho_max);
    if (c.construct.rho_max <= c.construct.rho0) config_error(p + ".rho_max", "must exceed rho0");
    c.construct.tol = get_positive(s, p, "tol", c.construct.tol);
    c.construct.max_iterations = get_int(s, p, "max_iterations", c.construct.max_iterations, 1);
    c.construct.nodes_per_period = get_int(s, p, "nodes_per_period", c.construct.nodes_per_period, kMinNodesPerPeriod);
    c.construct.max_escalations = get_int(s, p, "max_escalations", c.construct.max_escalations, 0);
    c.construct.escalation_factor = get_positive(s, p, "escalation_factor", c.construct.escalation_factor);
    if (c.construct.escalation_factor <= 1.0) config_error(p + ".escalation_factor", "must exceed 1");
  }
  if (j.contains("shoot")) {
    const std::string p = "config.shoot";
    const json& s = j["shoot"];
    check_keys(s, p, {"r0", "tol", "samples", "r_budget", "event_tol", "f_extension"});
    if (s.contains("f_extension") && s["f_extension"] != kExtensionNote) {
      config_error(p + ".f_extension", std::string("only \"") + kExtensionNote + "\" is supported");
    }
    if (s.contains("r0") && !s["r0"].is_null()) {
      c.r0 = get_positive(s, p, "r0", 0.05);
      if (*c.r0 >= 1.0) config_error(p + ".r0", "must lie in (0, 1)");
    }
    const double tol = get_positive(s, p, "tol", c.shoot.rel_tol);
    c.shoot.rel_tol = c.shoot.abs_tol = tol;
    c.shoot.samples = get_int(s, p, "samples", c.shoot.samples, 16);
    if (s.contains("r_budget") && !s["r_budget"].is_null()) c.shoot.r_budget = get_positive(s, p, "r_budget", 0.0);
    c.shoot.event_tol = get_positive(s, p, "event_tol", c.shoot.event_tol);
  }
  if (j.contains("verify")) {
    const std::string p = "config.verify";
    const json& s = j["verify"];
    check_keys(s, p, {"sigma_list", "eps_list", "bumps", "fit_window"});
    c.sigma_list = get_positive_list(s, p, "sigma_list", c.sigma_list);
    c.eps_list = get_positive_list(s, p, "eps_list", c.eps_list);
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
      if (c.eps_list[i] >= 1.0) config_error(p + ".eps_list[" + std::to_string(i) + "]", "must lie in (0, 1)");
    }
    if (s.contains("bumps")) {
      if (!s["bumps"].is_array()) config_error(p + ".bumps", "expected an array");
      c.bumps.clear();
      for (std::size_t i = 0; i < s["bumps"].size(); ++i) {
        const std::string bp = p + ".bumps[" + std::to_string(i) + "]";
        const json& b = s["bumps"][i];
        check_keys(b, bp, {"radius_fraction", "power"});
        BumpSpec spec;
        spec.radius_fraction = get_positive(b, bp, "radius_fraction", spec.radius_fraction);
        if (spec.radius_fraction >= 1.0) config_error(bp + ".radius_fraction", "must lie in (0, 1)");
        spec.power = get_int(b, bp, "power", spec.power, 3);
        c.bumps.push_back(spec);
      }
    }
    if (s.contains("fit_window")) {
      const auto w = get_positive_list(s, p, "fit_window", {});
      if (w.size() != 2 || !(w[1] > w[0])) config_error(p + ".fit_window", "expected [rho_lo, rho_hi] increasing");
      c.fit_rho_lo = w[0];
      c.fit_rho_hi = w[1];
    }
  }
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_int(j, "config", "threads", 0, 0));
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["nonlinearity"] = to_json(c.nonlinearity);
  j["classify"] = {{"B", c.B_override ? json(*c.B_override) : json(nullptr)},
                   {"points", c.estimate.points},
                   {"a_max", c.estimate.a_max},
                   {"rho_min", c.hypothesis.rho_min},
                   {"rho_max", c.hypothesis.rho_max},
                   {"per_decade", c.hypothesis.per_decade}};
  j["construct"] = {{"rho0", c.construct.rho0},
                    {"rho_max", c.construct.rho_max},
                    {"tol", c.construct.tol},
                    {"max_iterations", c.construct.max_iterations},
                    {"nodes_per_period", c.construct.nodes_per_period},
                    {"max_escalations", c.construct.max_escalations},
                    {"escalation_factor", c.construct.escalation_factor}};
  j["shoot"] = {{"r0", c.r0 ? json(*c.r0) : json(nullptr)},
                {"tol", c.shoot.rel_tol},
                {"samples", c.shoot.samples},
                {"r_budget", c.shoot.r_budget > 0.0 ? json(c.shoot.r_budget) : json(nullptr)},
                {"event_tol", c.shoot.event_tol},
                {"f_extension", kExtensionNote}};
  json bumps = json::array();
  for (const auto& b : c.bumps) bumps.push_back({{"radius_fraction", b.radius_fraction}, {"power", b.power}});
  j["verify"] = {{"sigma_list", c.sigma_list},
                 {"eps_list", c.eps_list},
                 {"bumps", bumps},
                 {"fit_window", {c.fit_rho_lo, c.fit_rho_hi}}};
  j["threads"] = c.threads;
  return j;
}

RunConfig demo_config(const std::string& name, std::optional<double> q, std::optional<double> r) {
  RunConfig c;
  if (name == "example3.1") {
    c.nonlinearity = FamilySpec::power_exp(q.value_or(2.0), r.value_or(1.0));
  } else if (name == "example3.2") {
    c.nonlinearity = FamilySpec::sum_exp(q.value_or(2.0), r.value_or(0.5));
  } else if (name == "example3.3") {
    c.nonlinearity = FamilySpec::log_exp(q.value_or(2.0), r.value_or(1.0));
  } else if (name == "example3.4") {
    if (r) throw Error(ErrorKind::Config, "demo example3.4: --r does not apply");
    c.nonlinearity = FamilySpec::iter_exp(q.value_or(1.0));
  } else {
    throw Error(ErrorKind::Config, "demo: unknown example '" + name + "' (example3.1 .. example3.4)");
  }
  return c;
}

// ---------------------------------------------------------------------------

PipelineResult run_pipeline(const RunConfig& config, Stage last) {
  PipelineResult res;
  res.config = config;
  if (config.r0) res.config.construct.rho0 = ef_map(*config.r0);
  if (config.threads > 0) set_default_threads(config.threads);

  TransformF t(Nonlinearity::make(config.nonlinearity));
  log_message(LogLevel::Info, "nonlinearity: " + t.nonlinearity().describe());

  ClassifyOptions copts;
  copts.estimate = config.estimate;
  copts.hypothesis = config.hypothesis;
  copts.B_override = config.B_override;
  res.classification = classify(t, copts);
  const Verdict verdict = res.classification.hypothesis.verdict;
  log_message(LogLevel::Info, "model B = " + fmt_double(res.classification.model_B) +
                                  ", hypothesis verdict: " + to_string(verdict));
  if (last == Stage::Classify) {
    res.hypothesis_failed = verdict == Verdict::Fail;
    return res;
  }
  if (verdict == Verdict::Fail) {
    res.hypothesis_failed = true;
    res.failure = "hypothesis on eps1 + eps2 is violated: the weighted correction terms do not decay";
    return res;
  }

  const ModelProblem m = build_model(res.classification.model_B);
  ConstructOptions copt = res.config.construct;
  copt.verdict = verdict;
  res.correction = solve_correction(t, m, copt);
  log_message(LogLevel::Info, "correction converged in " + std::to_string(res.correction->iterations) +
                                  " iterations at rho0 = " + fmt_double(res.correction->grid.rho0));
  RadialProfile inner = assemble_inner(*res.correction);
  if (config.r0 && res.correction->escalations > 0) {
    inner.notes.push_back("rho0 was raised from the requested matching radius r0 = " + fmt_double(*config.r0) +
                          " to r0 = " + fmt_double(inner.r0));
  }
  res.profile = inner;
  if (last == Stage::Construct) {
    res.residual = ode_residual(*res.profile, t.nonlinearity());
    return res;
  }

  const ProfileNode& edge = inner.nodes.back();
  res.dirichlet = find_dirichlet_radius(t.nonlinearity(), static_cast<double>(edge.r()), edge.u,
                                        static_cast<double>(edge.u_prime()), config.shoot);
  log_message(LogLevel::Info, "Dirichlet radius R = " + fmt_double(res.dirichlet->R));
  res.profile = assemble_full(inner, *res.dirichlet);
  res.shoot_diag = shoot_diagnostics(*res.profile, t.nonlinearity(), m);
  res.residual = ode_residual(*res.profile, t.nonlinearity());
  if (last == Stage::Extend) return res;

  VerificationReport rep;
  rep.residual = *res.residual;
  if (auto mt = main_term(config.nonlinearity)) {
    try {
      rep.expansion = expansion_compare(*res.profile, *mt, config.fit_rho_lo, config.fit_rho_hi);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("expansion fit skipped: ") + e.what());
    }
  } else {
    rep.notes.push_back("no closed-form expansion for this nonlinearity; fit skipped");
  }

  DistributionalOptions dopts;
  dopts.L_list.clear();
  for (double eps : config.eps_list) dopts.L_list.push_back(-std::log(eps));
  std::sort(dopts.L_list.begin(), dopts.L_list.end());
  for (const auto& b : config.bumps) {
    BumpTest bump{b.radius_fraction * res.dirichlet->R, b.power, 1.0};
    try {
      rep.distributional.push_back(distributional_test(*res.profile, t.nonlinearity(), m.B(), bump, dopts));
    } catch (const Error& e) {
      rep.notes.push_back(std::string("distributional test skipped: ") + e.what());
      break;
    }
  }
  const bool slow_tail = std::any_of(rep.distributional.begin(), rep.distributional.end(), [&](const auto& d) {
    return !d.pass && d.monotone && std::abs(d.alpha - d.expected) <= dopts.alpha_tolerance;
  });
  if (slow_tail && config.nonlinearity.family != Family::Model) {
    rep.notes.push_back(
        "distributional: the decay exponent matches 1/B but the extrapolated J misses the tolerance; "
        "logarithmic corrections to the L^(-1/B) decay bias the fit over this range of -log eps");
  }
  try {
    rep.bounds = bound_checks(*res.profile, t.nonlinearity(), m.B(), config.sigma_list);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("bound checks skipped: ") + e.what());
  }
  if (res.config.construct.rho_max >= 5000.0) rep.ff = ff_band(t, m);
  rep.energy = energy_trend(*res.profile);
  if (m.B() > 1.0 && m.B() < 2.0) {
    rep.notes.push_back("for 1 < B < 2 the energy 2 int u_rho^2 drho is expected to stay bounded");
  }
  res.verification = rep;
  return res;
}

json report_json(const PipelineResult& r, Stage last) {
  json j;
  j["config"] = to_json(r.config);
  j["classification"] = to_json(r.classification);
  j["hypothesis_failed"] = r.hypothesis_failed;
  if (!r.failure.empty()) j["failure"] = r.failure;
  if (last == Stage::Classify) return j;
  if (r.correction) j["correction"] = to_json(*r.correction);
  if (r.profile) j["profile"] = profile_summary(*r.profile);
  if (r.residual) {
    j["residual_max_rel"] = r.residual->max_rel;
    j["residual_inner_max_rel"] = r.residual->inner_max;
    j["residual_outer_max_rel"] = r.residual->outer_max;
  }
  if (r.dirichlet) j["dirichlet"] = to_json(*r.dirichlet);
  if (r.shoot_diag) j["shoot_diagnostics"] = to_json(*r.shoot_diag);
  if (r.verification) j["verification"] = to_json(*r.verification);
  return j;
}

void write_profile_csv(std::ostream& os, const RadialProfile& p, const std::vector<double>* residual) {
  os << "r,rho,u,u_prime,phi,eta,residual,segment\r\n";
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const auto& n = p.nodes[i];
    const double res = residual && i < residual->size() ? (*residual)[i] : std::nan("");
    os << fmt_long(n.r()) << ',' << fmt_double(n.rho) << ',' << fmt_double(n.u) << ',' << fmt_long(n.u_prime())
       << ',' << fmt_double(n.phi) << ',' << fmt_double(n.eta) << ',' << fmt_double(res) << ','
       << to_string(n.segment) << "\r\n";
  }
}

}  // namespace singulib
