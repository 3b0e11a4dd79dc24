#pragma once

#include <optional>

#include "singulib/nonlinearity.hpp"

namespace singulib {

/// Closed-form values of the scale-free functionals of the model g at
/// psi(rho). H = g G, D = 1 - g'G, E = g g'' G / g' - 1, minus_log = -log G.
struct ModelFunctionals {
  double H = 0.0;
  double D = 0.0;
  double E = 0.0;
  double minus_log = 0.0;
};

/// Model nonlinearity g with explicit singular solution v. For B > 1,
/// g(s) = 4/(B B') s^{1-2B'} e^{s^{B'}}; for B = 1, g(s) = 4 e^{e^s - 2s}.
class ModelProblem {
 public:
  static ModelProblem build(double B);

  double B() const { return B_; }
  /// B/(B-1); infinite on the B = 1 branch.
  double Bprime() const { return Bprime_; }
  bool unit() const { return unit_; }

  double log_g(double s) const;
  double g(double s) const;
  double g_prime(double s) const;
  double g_second(double s) const;
  double G(double s) const;
  double log_G(double s) const;

  /// Explicit solution v(r), r in (0, 1), and its r-derivative.
  double v(double r) const;
  double v_prime(double r) const;
  /// psi(rho) = v(r) with rho = 1 - 2 log r.
  double psi(double rho) const;
  double psi_prime(double rho) const;

  /// (B/4) r^2 (log(1/r^2) + 1) = G(v(r)).
  double G_of_v(double r) const;
  /// log of (B/4) rho e^{1-rho} = log G(psi(rho)).
  double log_G_of_psi(double rho) const;

  /// Functionals of g evaluated at psi(rho), written in rho so they stay
  /// exact for large rho.
  ModelFunctionals functionals_at_rho(double rho) const;
  /// Same quantities at an arbitrary s in the model's domain.
  ModelFunctionals functionals_at_s(double s) const;

  /// g as a Nonlinearity (for quadrature cross-checks and shooting).
  Nonlinearity as_nonlinearity() const { return Nonlinearity::make(FamilySpec::model(B_)); }

 private:
  double B_ = 2.0;
  double Bprime_ = 2.0;
  bool unit_ = false;
};

inline ModelProblem build_model(double B) { return ModelProblem::build(B); }

/// phi(rho) = F^{-1}[(B/4) rho e^{1-rho}]. Hints bracket the root when
/// known (monotone sweeps).
double phi(const ModelProblem& m, const TransformF& t, double rho,
           std::optional<double> lo_hint = std::nullopt, std::optional<double> hi_hint = std::nullopt);

}  // namespace singulib
