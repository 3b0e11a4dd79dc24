#include "singulib/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "singulib/error.hpp"
#include "singulib/numerics.hpp"

namespace singulib {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double safe_a(const Nonlinearity& nl, double s) {
  const double v = nl.a(s);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

}  // namespace

BFunctionals b_functionals(const TransformF& t, double s) {
  const Functionals fn = t.functionals(s);
  if (!(fn.logF < 0.0)) {
    throw Error(ErrorKind::Domain, "B functionals need F(s) < 1; log F(" + std::to_string(s) +
                                       ") = " + std::to_string(fn.logF));
  }
  if (!(std::abs(fn.D) > fn.errD)) {
    throw Error(ErrorKind::Classification, "sub-exponential borderline: 1 − f′F ≡ 0");
  }
  const double L = -fn.logF;
  BFunctionals out;
  out.s = s;
  out.B1_inv = L * fn.D;
  out.B2_inv = (1.0 - fn.D) * L * L * fn.E;
  // log F carries the absolute error of log H.
  const double errL = fn.errH / fn.H + 2.0 * kEps * L;
  out.err1 = L * fn.errD + std::abs(fn.D) * errL;
  out.err2 = L * L * (fn.errE + std::abs(fn.E) * fn.errD) + 2.0 * L * std::abs(fn.E) * errL;
  out.cancellation_guarded = fn.D < 1e-13 && fn.routeD == Route::Series;
  return out;
}

BEstimate estimate_B(const TransformF& t, const EstimateOptions& opts) {
  const Nonlinearity& nl = t.nonlinearity();
  BEstimate est;

  // Start where F is comfortably below 1 and log s is positive.
  double s_lo = std::max({nl.s0() * 1.2, std::exp(1.0), nl.s0() + 0.1});
  for (int k = 0; k < 200 && !(t.log_F(s_lo) < -2.0); ++k) s_lo *= 1.25;

  // End where a(s) reaches a_max (doubling, then bisection in log s).
  double s_hi = s_lo;
  while (safe_a(nl, s_hi) < opts.a_max) s_hi *= 2.0;
  double lo = s_hi / 2.0, hi = s_hi;
  for (int k = 0; k < 60; ++k) {
    const double mid = std::sqrt(lo * hi);
    (safe_a(nl, mid) < opts.a_max ? lo : hi) = mid;
  }
  s_hi = lo;
  if (!(s_hi > s_lo * 1.5)) s_hi = s_lo * 1.5;

  const std::vector<double> grid = geometric_grid(s_lo, s_hi, opts.points);
  std::vector<std::optional<BFunctionals>> raw(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      raw[i] = b_functionals(t, grid[i]);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Classification) throw;
    }
  });
  for (auto& r : raw)
    if (r && std::isfinite(r->B2_inv)) est.samples.push_back(*r);

  if (est.samples.size() < 8) {
    est.note = "too few valid samples";
    return est;
  }
  const BFunctionals& first = est.samples.front();
  const BFunctionals& last = est.samples.back();
  est.last_inv = last.B2_inv;
  est.A_estimate = 1.0 - t.functionals(last.s).D;
  est.b1_b2_gap_first = std::abs(first.B1_inv - first.B2_inv);
  est.b1_b2_gap_last = std::abs(last.B1_inv - last.B2_inv);

  // Upper half of the grid, extrapolated to 1/log s -> 0.
  std::vector<double> u, y;
  for (std::size_t i = est.samples.size() / 2; i < est.samples.size(); ++i) {
    u.push_back(1.0 / std::log(est.samples[i].s));
    y.push_back(est.samples[i].B2_inv);
  }
  const std::vector<double> quad = fit_polynomial(u, y, 2);
  const std::size_t third = u.size() / 3;
  const LineFit lin = fit_line(std::vector<double>(u.end() - static_cast<std::ptrdiff_t>(u.size() - third), u.end()),
                               std::vector<double>(y.end() - static_cast<std::ptrdiff_t>(y.size() - third), y.end()));
  est.limit_inv = quad[0];
  double ss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = y[i] - (quad[0] + quad[1] * u[i] + quad[2] * u[i] * u[i]);
    ss += r * r;
  }
  est.fit_rms = std::sqrt(ss / static_cast<double>(u.size()));

  if (!(est.limit_inv > 0.0) || !std::isfinite(est.limit_inv)) {
    est.note = "extrapolated 1/B is not positive";
    return est;
  }
  if (std::abs(quad[0] - lin.intercept) > 0.1 * std::abs(quad[0])) {
    est.note = "extrapolation unstable: quadratic and linear fits disagree";
    return est;
  }
  est.B = 1.0 / est.limit_inv;
  if (*est.B < 1.0 - 0.05) est.note = "B below 1: growth condition on B likely violated";
  return est;
}

EpsilonSample epsilons_at(const TransformF& t, const ModelProblem& m, double rho, double phi_value,
                          const Functionals& fn) {
  (void)t;
  EpsilonSample out;
  out.rho = rho;
  out.phi = phi_value;
  const ModelFunctionals mg = m.functionals_at_rho(rho);
  // F(phi) = G(psi) by construction, so both share the exact -log.
  const double L = mg.minus_log;
  out.minus_log_F = L;
  out.H = fn.H;
  out.Df = fn.D;

  const Jet& j = fn.jet;
  const double ap = j[1], app = j[2], appp = j[3];
  // Error in phi from the inversion and from log F itself.
  const double dphi = fn.H * (fn.errH / fn.H + 2.2e-16 * std::abs(j[0])) + 4.0 * kEps * std::abs(phi_value);

  const double diff1 = mg.D - fn.D;
  const double dDds = std::abs(-app * fn.H + ap * fn.D);
  const double noise1 = fn.errD + 4.0 * kEps * (std::abs(fn.D) + std::abs(mg.D)) + dDds * dphi;
  out.dD = std::abs(diff1) > 2.0 * noise1 ? diff1 : 0.0;
  out.eps1 = L * std::abs(out.dD);

  const double Qf = (1.0 - fn.D) * fn.E;
  const double Qg = (1.0 - mg.D) * mg.E;
  const double diff2 = Qf - Qg;
  const double dlogE = std::abs(app) / ap + std::abs(appp) / (std::abs(app) + 1e-300) + 4.0 / std::abs(phi_value);
  const double noise2 = fn.errE + std::abs(fn.E) * fn.errD + 4.0 * kEps * (std::abs(Qf) + std::abs(Qg)) +
                        std::abs(Qf) * dlogE * dphi;
  out.eps2 = std::abs(diff2) > 2.0 * noise2 ? L * L * std::abs(diff2) : 0.0;
  out.S = std::sqrt(rho) * (out.eps1 + out.eps2);
  return out;
}

EpsilonSample epsilons(const TransformF& t, const ModelProblem& m, double rho) {
  const double p = phi(m, t, rho);
  return epsilons_at(t, m, rho, p, t.functionals(p));
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::vector<double> rho_grid(const HypothesisOptions& opts) {
  const double decades = std::log10(opts.rho_max / opts.rho_min);
  const auto n = static_cast<std::size_t>(std::lround(decades * static_cast<double>(opts.per_decade))) + 1;
  return geometric_grid(opts.rho_min, opts.rho_max, n);
}

HypothesisResult hypothesis_check(const TransformF& t, const ModelProblem& m, const std::vector<double>& grid) {
  if (grid.size() < 4 || !(grid.back() >= 1000.0 * grid.front())) {
    throw Error(ErrorKind::InvalidArgument, "hypothesis grid must span at least 3 decades of rho");
  }
  HypothesisResult res;
  res.samples.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { res.samples[i] = epsilons(t, m, grid[i]); });

  const double lo = grid.front(), hi = grid.back();
  double sum_first = 0, sum_last = 0;
  int n_first = 0, n_last = 0;
  std::vector<double> xl, yl;
  bool all_zero = true;
  for (const auto& e : res.samples) {
    if (e.S != 0.0) all_zero = false;
    if (e.rho <= 10.0 * lo * (1 + 1e-12)) {
      sum_first += e.S;
      ++n_first;
    }
    if (e.rho >= hi / 10.0 * (1 - 1e-12)) {
      sum_last += e.S;
      ++n_last;
      xl.push_back(std::log10(e.rho));
      yl.push_back(e.S);
    }
  }
  res.first_decade_mean = sum_first / n_first;
  res.last_decade_mean = sum_last / n_last;
  res.identically_zero = all_zero;
  if (all_zero) {
    res.verdict = Verdict::Pass;
    return res;
  }
  const double decades = std::log10(hi / lo);
  const LineFit fit = fit_line(xl, yl);
  res.last_decade_slope = res.last_decade_mean > 0 ? fit.slope / res.last_decade_mean : fit.slope;
  if (res.first_decade_mean > 0 && res.last_decade_mean > 0) {
    res.trend = std::log10(res.last_decade_mean / res.first_decade_mean) / decades;
  }
  if (res.first_decade_mean >= 2.0 * res.last_decade_mean && fit.slope < 0) {
    res.verdict = Verdict::Pass;
  } else if (res.last_decade_mean >= 2.0 * res.first_decade_mean && fit.slope > 0) {
    res.verdict = Verdict::Fail;
  } else {
    res.verdict = Verdict::Inconclusive;
  }
  return res;
}

HypothesisResult hypothesis_check(const TransformF& t, const ModelProblem& m, const HypothesisOptions& opts) {
  return hypothesis_check(t, m, rho_grid(opts));
}

double choose_model_B(const Nonlinearity& nl, std::optional<double> override_B, const BEstimate* estimate) {
  if (auto known = nl.known_B()) return *known;
  if (override_B) return *override_B;
  if (estimate && estimate->B) return std::max(1.0, *estimate->B);
  throw Error(ErrorKind::Classification,
              "no exponent B available: estimate did not converge (" + (estimate ? estimate->note : std::string("none")) +
                  "); supply \"B\" in the config");
}

ClassificationReport classify(const TransformF& t, const ClassifyOptions& opts) {
  ClassificationReport rep;
  const Nonlinearity& nl = t.nonlinearity();
  rep.description = nl.describe();
  rep.warnings = nl.warnings();
  rep.estimate = estimate_B(t, opts.estimate);
  if (!rep.estimate.note.empty()) rep.warnings.push_back("B estimate: " + rep.estimate.note);
  rep.model_B = choose_model_B(nl, opts.B_override, &rep.estimate);
  rep.model_B_source = nl.known_B() ? "closed form" : opts.B_override ? "config" : "estimate";
  if (rep.estimate.B && std::abs(*rep.estimate.B - rep.model_B) > 0.1 * rep.model_B) {
    rep.warnings.push_back("estimated B differs from the model B by more than 10%");
  }
  rep.hypothesis = hypothesis_check(t, build_model(rep.model_B), opts.hypothesis);
  return rep;
}

nlohmann::json to_json(const ClassificationReport& r) {
  using nlohmann::json;
  json j;
  j["nonlinearity"] = r.description;
  j["A_estimate"] = r.estimate.A_estimate;
  j["B_estimate"] = r.estimate.B ? json(*r.estimate.B) : json(nullptr);
  j["B_extrapolated_inverse"] = r.estimate.limit_inv;
  j["B_fit_rms"] = r.estimate.fit_rms;
  j["B1_B2_gap"] = {{"first", r.estimate.b1_b2_gap_first}, {"last", r.estimate.b1_b2_gap_last}};
  j["model_B"] = r.model_B;
  j["model_B_source"] = r.model_B_source;
  json samples = json::array();
  for (const auto& s : r.estimate.samples) samples.push_back({{"s", s.s}, {"B1_inv", s.B1_inv}, {"B2_inv", s.B2_inv}});
  j["samples"] = samples;
  json eps = json::array();
  for (const auto& e : r.hypothesis.samples)
    eps.push_back({{"rho", e.rho}, {"phi", e.phi}, {"eps1", e.eps1}, {"eps2", e.eps2}, {"S", e.S}});
  j["epsilon_samples"] = eps;
  j["hypothesis"] = {{"verdict", to_string(r.hypothesis.verdict)},
                     {"first_decade_mean", r.hypothesis.first_decade_mean},
                     {"last_decade_mean", r.hypothesis.last_decade_mean},
                     {"last_decade_slope", r.hypothesis.last_decade_slope},
                     {"trend_per_decade", r.hypothesis.trend},
                     {"identically_zero", r.hypothesis.identically_zero}};
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace singulib
