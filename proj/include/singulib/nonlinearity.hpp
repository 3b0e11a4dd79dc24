#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "singulib/asymptotics.hpp"
#include "singulib/expr.hpp"
#include "singulib/jet.hpp"

namespace singulib {

enum class Family { PowerExp, SumExp, LogExp, IterExp, Model, Custom };

const char* to_string(Family family);

/// User-facing description of a nonlinearity f = e^{a(s)}.
struct FamilySpec {
  Family family = Family::PowerExp;
  double q = 2.0;
  double r = 1.0;
  double B = 2.0;
  std::string a_source;        ///< custom family only
  std::optional<double> s0;    ///< lower domain bound; family default if absent

  static FamilySpec power_exp(double q, double r) { return {Family::PowerExp, q, r, 0.0, {}, {}}; }
  static FamilySpec sum_exp(double q, double r) { return {Family::SumExp, q, r, 0.0, {}, {}}; }
  static FamilySpec log_exp(double q, double r) { return {Family::LogExp, q, r, 0.0, {}, {}}; }
  static FamilySpec iter_exp(double q) { return {Family::IterExp, q, 0.0, 0.0, {}, {}}; }
  static FamilySpec model(double B) { return {Family::Model, 0.0, 0.0, B, {}, {}}; }
  static FamilySpec custom(std::string a, std::optional<double> s0 = std::nullopt) {
    return {Family::Custom, 0.0, 0.0, 0.0, std::move(a), s0};
  }
};

/// Parses {"family": ..., params}. Unknown keys are rejected with
/// Error(Config) naming the offending field.
FamilySpec family_spec_from_json(const nlohmann::json& j, const std::string& path = "nonlinearity");
nlohmann::json to_json(const FamilySpec& spec);

/// Within this distance of 1 a model exponent is treated as B = 1.
inline constexpr double kModelUnitTolerance = 1e-8;

/// f = e^{a(s)} with f, f' > 0 on (s0, inf).
class Nonlinearity {
 public:
  static Nonlinearity make(const FamilySpec& spec);

  const FamilySpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  const Expression& exponent() const { return a_; }
  double s0() const { return s0_; }

  /// Closed-form growth exponent B for built-in families.
  std::optional<double> known_B() const;

  /// Smallest sampled s beyond which a'(s) > 0 held on the check grid.
  double f1_onset() const { return f1_onset_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::string describe() const;

  double a(double s) const { return eval(a_, s); }
  long double a(long double s) const { return eval(a_, s); }
  Jet jet(double s, int order = 5) const { return eval_jet(a_, s, order); }

  double f(double s) const;
  double f_prime(double s) const;
  double f_second(double s) const;

  /// C^1 positive increasing continuation to [0, inf): below s0 the
  /// exponent is continued linearly, a(s0) + a'(s0)(s - s0).
  double f_extended(double s) const;
  double log_f_extended(double s) const;

 private:
  FamilySpec spec_;
  Expression a_;
  double s0_ = 0.0;
  double a_s0_ = 0.0;
  double ap_s0_ = 0.0;
  double f1_onset_ = 0.0;
  std::vector<std::string> warnings_;
};

enum class Route { Quadrature, Series };

/// Relative accuracy floor of the quadrature for f F at a point where
/// a(s) = a_value (long double cancellation in a(s + x) - a(s)).
double quadrature_floor(double a_value);

/// F-related quantities at one point. H = f F, D = 1 - f' F and
/// E = f f'' F / f' - 1 are the scale-free combinations every functional
/// is built from; logF = log H - a never underflows.
struct Functionals {
  double s = 0.0;
  Jet jet;
  double logF = 0.0;
  double H = 0.0;
  double D = 0.0;
  double E = 0.0;
  double errH = 0.0;
  double errD = 0.0;
  double errE = 0.0;
  Route routeH = Route::Quadrature;
  Route routeD = Route::Quadrature;
  Route routeE = Route::Quadrature;
};

struct TransformOptions {
  double rel_tol = 1e-13;
  double abs_tol = 0.0;
  int max_bracket_doublings = 200;
  int max_root_iterations = 200;
};

/// F(s) = int_s^inf dtau / f(tau) and its inverse.
class TransformF {
 public:
  explicit TransformF(Nonlinearity nl, TransformOptions opts = {});

  const Nonlinearity& nonlinearity() const { return nl_; }
  const TransformOptions& options() const { return opts_; }

  Functionals functionals(double s) const;

  double log_F(double s) const;
  /// May underflow to 0 for large s; use log_F there.
  double F_of(double s) const;
  /// f(s) F(s) by adaptive quadrature only (no series shortcut).
  double scaled_F_quadrature(double s, double* err = nullptr) const;

  /// log F(s0+), the upper end of the invertible range.
  double log_F_max() const { return log_F_max_; }

  double F_inv(double w) const;
  /// Solves log F(s) = log_w. Optional hints narrow the initial bracket.
  double F_inv_log(double log_w, std::optional<double> lo_hint = std::nullopt,
                   std::optional<double> hi_hint = std::nullopt) const;

 private:
  Nonlinearity nl_;
  TransformOptions opts_;
  double log_F_max_ = 0.0;
};

}  // namespace singulib
