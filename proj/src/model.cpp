#include "singulib/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "singulib/error.hpp"

namespace singulib {

ModelProblem ModelProblem::build(double B) {
  if (!(B >= 1.0) || !std::isfinite(B)) {
    throw Error(ErrorKind::InvalidArgument, "model problem needs B >= 1, got " + std::to_string(B));
  }
  ModelProblem m;
  m.unit_ = std::abs(B - 1.0) <= kModelUnitTolerance;
  m.B_ = m.unit_ ? 1.0 : B;
  m.Bprime_ = m.unit_ ? std::numeric_limits<double>::infinity() : B / (B - 1.0);
  return m;
}

double ModelProblem::log_g(double s) const {
  if (unit_) return std::log(4.0) + std::exp(s) - 2.0 * s;
  const double P = Bprime_;
  return std::log(4.0 / (B_ * P)) + (1.0 - 2.0 * P) * std::log(s) + std::pow(s, P);
}

double ModelProblem::g(double s) const { return std::exp(log_g(s)); }

double ModelProblem::g_prime(double s) const {
  if (unit_) return (std::exp(s) - 2.0) * g(s);
  const double P = Bprime_;
  return (P * std::pow(s, P - 1.0) + (1.0 - 2.0 * P) / s) * g(s);
}

double ModelProblem::g_second(double s) const {
  double ap, app;
  if (unit_) {
    ap = std::exp(s) - 2.0;
    app = std::exp(s);
  } else {
    const double P = Bprime_;
    ap = P * std::pow(s, P - 1.0) + (1.0 - 2.0 * P) / s;
    app = P * (P - 1.0) * std::pow(s, P - 2.0) - (1.0 - 2.0 * P) / (s * s);
  }
  return (app + ap * ap) * g(s);
}

double ModelProblem::log_G(double s) const {
  const double x = unit_ ? std::exp(s) : std::pow(s, Bprime_);
  return std::log(B_ / 4.0) + std::log1p(x) - x;
}

double ModelProblem::G(double s) const { return std::exp(log_G(s)); }

double ModelProblem::v(double r) const {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::Domain, "v(r) needs 0 < r < 1");
  const double L = -2.0 * std::log(r);
  return unit_ ? std::log(L) : std::pow(L, 1.0 / Bprime_);
}

double ModelProblem::v_prime(double r) const {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::Domain, "v'(r) needs 0 < r < 1");
  const double L = -2.0 * std::log(r);
  if (unit_) return -2.0 / (r * L);
  return -(2.0 / (Bprime_ * r)) * std::pow(L, 1.0 / Bprime_ - 1.0);
}

double ModelProblem::psi(double rho) const {
  if (!(rho > 1.0)) throw Error(ErrorKind::Domain, "psi(rho) needs rho > 1");
  return unit_ ? std::log(rho - 1.0) : std::pow(rho - 1.0, 1.0 / Bprime_);
}

double ModelProblem::psi_prime(double rho) const {
  if (!(rho > 1.0)) throw Error(ErrorKind::Domain, "psi'(rho) needs rho > 1");
  return unit_ ? 1.0 / (rho - 1.0) : std::pow(rho - 1.0, 1.0 / Bprime_ - 1.0) / Bprime_;
}

double ModelProblem::G_of_v(double r) const {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::Domain, "G(v(r)) needs 0 < r < 1");
  return 0.25 * B_ * r * r * (1.0 - 2.0 * std::log(r));
}

double ModelProblem::log_G_of_psi(double rho) const {
  return std::log(0.25 * B_) + std::log(rho) + 1.0 - rho;
}

namespace {

// x = psi^{B'} (or e^psi when B = 1); both branches are rational in x.
ModelFunctionals model_functionals_x(double x, double s, bool unit, double B, double P) {
  ModelFunctionals out;
  out.minus_log = x - std::log1p(x) - std::log(0.25 * B);
  if (unit) {
    out.H = (x + 1.0) / (x * x);
    out.D = 1.0 / x + 2.0 / (x * x);
    out.E = (x + 4.0) / (x * x * (x - 2.0));
  } else {
    out.H = s * (x + 1.0) / (P * x * x);
    out.D = 1.0 / (B * x) + (2.0 * P - 1.0) / (P * x * x);
    out.E = ((P - 1.0) * x + 2.0 * (2.0 * P - 1.0)) / (x * x * (P * x + 1.0 - 2.0 * P));
  }
  return out;
}

}  // namespace

ModelFunctionals ModelProblem::functionals_at_rho(double rho) const {
  if (!(rho > 1.0)) throw Error(ErrorKind::Domain, "model functionals need rho > 1");
  ModelFunctionals out = model_functionals_x(rho - 1.0, psi(rho), unit_, B_, Bprime_);
  out.minus_log = rho - 1.0 - std::log(rho) - std::log(0.25 * B_);
  return out;
}

ModelFunctionals ModelProblem::functionals_at_s(double s) const {
  const double x = unit_ ? std::exp(s) : std::pow(s, Bprime_);
  return model_functionals_x(x, s, unit_, B_, Bprime_);
}

double phi(const ModelProblem& m, const TransformF& t, double rho, std::optional<double> lo_hint,
           std::optional<double> hi_hint) {
  if (!(rho > 1.0)) throw Error(ErrorKind::Domain, "phi(rho) needs rho > 1");
  return t.F_inv_log(m.log_G_of_psi(rho), lo_hint, hi_hint);
}

}  // namespace singulib
