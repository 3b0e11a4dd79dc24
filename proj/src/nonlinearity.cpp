#include "singulib/nonlinearity.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "singulib/error.hpp"

namespace singulib {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Signed term "+ c*X" / "- c*X" for synthesized exponents.
std::string signed_term(double c, const std::string& x) {
  if (c == 0.0) return "";
  return (c < 0 ? " - " : " + ") + num(std::abs(c)) + "*" + x;
}

std::string exponent_source(const FamilySpec& spec, bool unit_model) {
  switch (spec.family) {
    case Family::PowerExp: return "s^" + num(spec.q) + signed_term(spec.r, "log(s)");
    case Family::SumExp: return "s^" + num(spec.q) + " + s^" + num(spec.r);
    case Family::LogExp: return "s^" + num(spec.q) + "*log(s)^" + num(spec.r);
    case Family::IterExp: return "exp(s^" + num(spec.q) + ")";
    case Family::Model: {
      if (unit_model) return "exp(s) - 2*s + " + num(std::log(4.0));
      const double bp = spec.B / (spec.B - 1.0);
      const double c = std::log(4.0 / (spec.B * bp));
      std::string src = "s^" + num(bp) + signed_term(1.0 - 2.0 * bp, "log(s)");
      if (c != 0.0) src += (c < 0 ? " - " : " + ") + num(std::abs(c));
      return src;
    }
    case Family::Custom: return spec.a_source;
  }
  return {};
}

double default_s0(const FamilySpec& spec, bool unit_model) {
  switch (spec.family) {
    case Family::PowerExp:
      return spec.r < 0 ? 1.05 * std::pow(-spec.r / spec.q, 1.0 / spec.q) : 0.05;
    case Family::SumExp: return 0.05;
    case Family::LogExp: return 1.05 * std::exp(std::max(0.0, -spec.r / spec.q));
    case Family::IterExp: return 0.05;
    case Family::Model: {
      if (unit_model) return 1.05 * std::log(2.0);
      const double bp = spec.B / (spec.B - 1.0);
      return 1.05 * std::pow((2.0 * bp - 1.0) / bp, 1.0 / bp);
    }
    case Family::Custom: return 1.0;
  }
  return 1.0;
}

void validate(const FamilySpec& spec, std::vector<std::string>& warnings) {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  switch (spec.family) {
    case Family::PowerExp:
    case Family::LogExp:
      if (!(spec.q > 1.0)) bad("q must be > 1");
      if (!std::isfinite(spec.r)) bad("r must be finite");
      break;
    case Family::SumExp:
      if (!(spec.q > 1.0)) bad("q must be > 1");
      if (!(spec.r > 0.0)) bad("sum_exp needs r > 0");
      if (!(spec.r < spec.q / 2.0))
        warnings.push_back("sum_exp with r >= q/2 is outside the range where the decay hypothesis is known to hold");
      break;
    case Family::IterExp:
      if (!(spec.q >= 1.0)) bad("iter_exp needs q >= 1");
      break;
    case Family::Model:
      if (!(spec.B >= 1.0)) bad("model needs B >= 1");
      break;
    case Family::Custom:
      if (spec.a_source.empty()) bad("custom family needs an exponent expression 'a'");
      break;
  }
  if (spec.s0 && !(*spec.s0 >= 0.0)) bad("s0 must be non-negative");
}

}  // namespace

double quadrature_floor(double a_value) { return 2e-16 + 4.4e-19 * std::abs(a_value); }

const char* to_string(Family family) {
  switch (family) {
    case Family::PowerExp: return "power_exp";
    case Family::SumExp: return "sum_exp";
    case Family::LogExp: return "log_exp";
    case Family::IterExp: return "iter_exp";
    case Family::Model: return "model";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

FamilySpec family_spec_from_json(const nlohmann::json& j, const std::string& path) {
  auto fail = [&](const std::string& field, const std::string& msg) {
    throw Error(ErrorKind::Config, path + (field.empty() ? "" : "." + field) + ": " + msg);
  };
  if (!j.is_object()) fail("", "expected an object");
  if (!j.contains("family") || !j["family"].is_string()) fail("family", "missing or not a string");
  const std::string family = j["family"].get<std::string>();

  std::set<std::string> allowed{"family", "s0"};
  FamilySpec spec;
  if (family == "power_exp") {
    spec.family = Family::PowerExp;
    allowed.insert({"q", "r"});
  } else if (family == "sum_exp") {
    spec.family = Family::SumExp;
    allowed.insert({"q", "r"});
  } else if (family == "log_exp") {
    spec.family = Family::LogExp;
    allowed.insert({"q", "r"});
  } else if (family == "iter_exp") {
    spec.family = Family::IterExp;
    allowed.insert("q");
  } else if (family == "model") {
    spec.family = Family::Model;
    allowed.insert("B");
  } else if (family == "custom") {
    spec.family = Family::Custom;
    allowed.insert("a");
  } else {
    fail("family", "unknown family '" + family + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(it.key(), "unknown key");
  }
  auto number = [&](const char* key, bool required, double fallback) {
    if (!j.contains(key)) {
      if (required) fail(key, "missing");
      return fallback;
    }
    if (!j[key].is_number()) fail(key, "expected a number");
    return j[key].get<double>();
  };
  switch (spec.family) {
    case Family::PowerExp:
    case Family::SumExp:
    case Family::LogExp:
      spec.q = number("q", true, 0.0);
      spec.r = number("r", true, 0.0);
      break;
    case Family::IterExp:
      spec.q = number("q", false, 1.0);
      break;
    case Family::Model:
      spec.B = number("B", true, 0.0);
      break;
    case Family::Custom:
      if (!j.contains("a") || !j["a"].is_string()) fail("a", "missing or not a string");
      spec.a_source = j["a"].get<std::string>();
      break;
  }
  if (j.contains("s0")) spec.s0 = number("s0", false, 0.0);
  return spec;
}

nlohmann::json to_json(const FamilySpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family);
  switch (spec.family) {
    case Family::PowerExp:
    case Family::SumExp:
    case Family::LogExp:
      j["q"] = spec.q;
      j["r"] = spec.r;
      break;
    case Family::IterExp: j["q"] = spec.q; break;
    case Family::Model: j["B"] = spec.B; break;
    case Family::Custom: j["a"] = spec.a_source; break;
  }
  if (spec.s0) j["s0"] = *spec.s0;
  return j;
}

Nonlinearity Nonlinearity::make(const FamilySpec& spec) {
  Nonlinearity nl;
  nl.spec_ = spec;
  validate(spec, nl.warnings_);
  const bool unit_model =
      spec.family == Family::Model && std::abs(spec.B - 1.0) <= kModelUnitTolerance;
  if (unit_model) nl.spec_.B = 1.0;
  nl.a_ = parse(exponent_source(nl.spec_, unit_model));
  nl.s0_ = spec.s0.value_or(default_s0(nl.spec_, unit_model));
  if (nl.a_.contains_log() && nl.s0_ <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "s0 must be positive when a(s) contains log");
  }

  // f > 0 is automatic for f = e^a; check a finite and a' > 0 on (s0, s0 + 50].
  for (int k = 0; k <= 50; ++k) {
    const double s = nl.s0_ + std::max(1e-6, 1e-4 * nl.s0_) * std::pow(50.0 / std::max(1e-6, 1e-4 * nl.s0_), k / 50.0);
    auto jet = try_eval_jet(nl.a_, s, 1);
    if (auto* err = std::get_if<EvalError>(&jet)) {
      // Double exponentials overflow long before s0 + 50; that is fine.
      if (err->kind == ErrorKind::Overflow && k > 0) break;
      throw Error(ErrorKind::InvalidArgument,
                  "a(s) cannot be evaluated at s = " + num(s) + ": " + err->message);
    }
    if (!(std::get<Jet>(jet)[1] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "f'(s) > 0 fails at s = " + num(s) + " (a'(s) = " + num(std::get<Jet>(jet)[1]) +
                      "); raise s0");
    }
  }
  const Jet j0 = nl.jet(nl.s0_, 1);
  nl.a_s0_ = j0[0];
  nl.ap_s0_ = j0[1];

  // Where the monotonicity condition first holds on a coarse log grid.
  const double lo = 1e-3, hi = std::max(10.0, 10.0 * nl.s0_);
  nl.f1_onset_ = hi;
  for (int k = 80; k >= 0; --k) {
    const double s = lo * std::pow(hi / lo, k / 80.0);
    auto jet = try_eval_jet(nl.a_, s, 1);
    if (std::holds_alternative<EvalError>(jet) || !(std::get<Jet>(jet)[1] > 0.0)) break;
    nl.f1_onset_ = s;
  }
  return nl;
}

std::optional<double> Nonlinearity::known_B() const {
  switch (spec_.family) {
    case Family::PowerExp:
    case Family::SumExp:
    case Family::LogExp: return spec_.q / (spec_.q - 1.0);
    case Family::IterExp: return 1.0;
    case Family::Model: return spec_.B;
    case Family::Custom: return std::nullopt;
  }
  return std::nullopt;
}

std::string Nonlinearity::describe() const {
  return std::string(to_string(spec_.family)) + ": f = exp(" + a_.print() + ")";
}

double Nonlinearity::f(double s) const { return std::exp(a(s)); }

double Nonlinearity::f_prime(double s) const {
  const Jet j = jet(s, 1);
  return j[1] * std::exp(j[0]);
}

double Nonlinearity::f_second(double s) const {
  const Jet j = jet(s, 2);
  return (j[2] + j[1] * j[1]) * std::exp(j[0]);
}

double Nonlinearity::log_f_extended(double s) const {
  if (s >= s0_) return a(s);
  return a_s0_ + ap_s0_ * (s - s0_);
}

double Nonlinearity::f_extended(double s) const { return std::exp(log_f_extended(s)); }

// ---------------------------------------------------------------------------

TransformF::TransformF(Nonlinearity nl, TransformOptions opts) : nl_(std::move(nl)), opts_(opts) {
  log_F_max_ = log_F(nl_.s0());
}

double TransformF::scaled_F_quadrature(double s, double* err_out) const {
  using boost::math::quadrature::gauss_kronrod;
  const Jet j = nl_.jet(s, 1);
  const long double as = nl_.a(static_cast<long double>(s));
  const long double ls = static_cast<long double>(s);
  auto integrand = [&](long double x) -> long double {
    const long double d = nl_.a(ls + x) - as;
    if (!(d < 11000.0L)) return 0.0L;  // includes inf from overflowing a
    return std::exp(-d);
  };
  // Cancellation in a(s + x) - a(s) limits accuracy for large |a|; asking
  // GK for more than that only buys pointless subdivision.
  const double rel = quadrature_floor(static_cast<double>(as));
  const long double panel_tol = std::max(4e-15L, static_cast<long double>(rel));
  // Panels scaled by the decay length 1/a'(s), doubling outward.
  const long double scale = 1.0L / static_cast<long double>(j[1]);
  long double total = 0.0L, err_total = 0.0L;
  long double lo = 0.0L, width = scale;
  for (int panel = 0; panel < 400; ++panel) {
    // Boost reports the error of the reference-interval integral without the
    // Jacobian, so integrate on [-1, 1] explicitly and rescale both.
    const long double half = 0.5L * width, mid = lo + half;
    auto mapped = [&](long double y) -> long double { return integrand(mid + half * y); };
    long double err = 0.0L;
    const long double piece =
        half * gauss_kronrod<long double, 31>::integrate(mapped, -1.0L, 1.0L, 6, panel_tol, &err);
    total += piece;
    err_total += half * std::abs(err);
    lo += width;
    if (panel > 0) width *= 2.0L;
    const long double end_value = integrand(lo);
    if (end_value * (lo + width) < 1e-21L * total && piece < 1e-21L * total) break;
  }
  if (err_out) *err_out = static_cast<double>(err_total) + rel * static_cast<double>(total);
  return static_cast<double>(total);
}

Functionals TransformF::functionals(double s) const {
  Functionals out;
  out.s = s;
  out.jet = nl_.jet(s, 5);
  const double ap = out.jet[1];
  const double curv = out.jet[2] / ap;
  if (!(ap > 0.0)) {
    throw Error(ErrorKind::Domain, "f'(s) <= 0 at s = " + num(s) + " (below s0?)");
  }

  std::optional<SeriesFunctionals> series;
  try {
    const ASequence an = a_sequence_from_jet(out.jet);
    if (std::abs(an[1] / an[0]) <= kTailGuard) series = series_functionals(out.jet);
  } catch (const Error&) {
  }

  // Skip quadrature when it could not beat the series anyway.
  bool series_good_enough = false;
  if (series) {
    const double qH = quadrature_floor(out.jet[0]) * series->H;
    series_good_enough = series->errH <= qH && series->errD <= ap * qH + 1.2e-16 &&
                         series->errE <= (ap + std::abs(curv)) * qH + 2.4e-16;
  }
  if (series_good_enough) {
    out.H = series->H;
    out.D = series->D;
    out.E = series->E;
    out.errH = series->errH;
    out.errD = series->errD;
    out.errE = series->errE;
    out.routeH = out.routeD = out.routeE = Route::Series;
  } else {
    double qerr = 0.0;
    const double H = scaled_F_quadrature(s, &qerr);
    out.H = H;
    out.errH = qerr;
    out.D = 1.0 - ap * H;
    out.errD = ap * qerr + 1.2e-16;
    out.E = (ap + curv) * H - 1.0;
    out.errE = (ap + std::abs(curv)) * qerr + 2.4e-16;
    if (series) {
      if (series->errH < out.errH) {
        out.H = series->H;
        out.errH = series->errH;
        out.routeH = Route::Series;
      }
      if (series->errD < out.errD) {
        out.D = series->D;
        out.errD = series->errD;
        out.routeD = Route::Series;
      }
      if (series->errE < out.errE) {
        out.E = series->E;
        out.errE = series->errE;
        out.routeE = Route::Series;
      }
    }
  }
  out.logF = std::log(out.H) - out.jet[0];
  return out;
}

double TransformF::log_F(double s) const {
  const Jet j = nl_.jet(s, 5);
  try {
    const ASequence an = a_sequence_from_jet(j);
    if (std::abs(an[1] / an[0]) <= kTailGuard) {
      const SeriesFunctionals sf = series_functionals(j);
      if (sf.errH <= 0.1 * opts_.rel_tol * sf.H) return std::log(sf.H) - j[0];
    }
  } catch (const Error&) {
  }
  return std::log(scaled_F_quadrature(s)) - j[0];
}

double TransformF::F_of(double s) const {
  if (!(s > nl_.s0()) && s != nl_.s0()) {
    throw Error(ErrorKind::Domain, "F(s) needs s > s0 = " + num(nl_.s0()) + ", got " + num(s));
  }
  return std::exp(log_F(s));
}

double TransformF::F_inv(double w) const {
  if (!(w > 0.0)) throw Error(ErrorKind::Domain, "F^{-1}(w) needs w > 0");
  return F_inv_log(std::log(w));
}

double TransformF::F_inv_log(double log_w, std::optional<double> lo_hint,
                             std::optional<double> hi_hint) const {
  if (!(log_w < log_F_max_)) {
    throw Error(ErrorKind::Domain, "w = exp(" + num(log_w) + ") outside (0, F(s0)) with log F(s0) = " +
                                       num(log_F_max_));
  }
  auto g = [&](double s) { return log_F(s) - log_w; };  // decreasing in s

  double lo = nl_.s0(), glo = log_F_max_ - log_w;
  if (lo_hint && *lo_hint > lo) {
    const double v = g(*lo_hint);
    if (v > 0) {
      lo = *lo_hint;
      glo = v;
    }
  }
  double hi = 0.0, ghi = 0.0;
  bool have_hi = false;
  if (hi_hint && *hi_hint > lo) {
    const double v = g(*hi_hint);
    if (v < 0) {
      hi = *hi_hint;
      ghi = v;
      have_hi = true;
    }
  }
  if (!have_hi) {
    double step = std::max(1.0, lo);
    for (int k = 0; k < opts_.max_bracket_doublings; ++k) {
      const double cand = lo + step;
      const double v = g(cand);
      if (v <= 0) {
        hi = cand;
        ghi = v;
        have_hi = true;
        break;
      }
      lo = cand;
      glo = v;
      step *= 2.0;
    }
  }
  if (!have_hi) throw Error(ErrorKind::Convergence, "F^{-1}: no bracket found");
  if (ghi == 0.0) return hi;

  std::uintmax_t max_iter = static_cast<std::uintmax_t>(opts_.max_root_iterations);
  auto tol = [&](double a, double b) {
    return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
  };
  auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, max_iter);
  if (max_iter >= static_cast<std::uintmax_t>(opts_.max_root_iterations)) {
    throw Error(ErrorKind::Convergence, "F^{-1}: root iteration budget exhausted");
  }
  return 0.5 * (a + b);
}

}  // namespace singulib
