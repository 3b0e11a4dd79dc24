#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "singulib/model.hpp"
#include "singulib/nonlinearity.hpp"
#include "singulib/profile.hpp"

namespace singulib {

/// Right-hand side f(w) of the radial equation w'' + w'/r + f(w) = 0.
using RadialSource = std::function<double(double)>;

struct ShootOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  /// Largest radius explored when looking for w = 0. When unset the a priori
  /// bound r0 exp(u0 / (r0 |u'(r0)|)) is used, beyond which w must be negative.
  double r_budget = 0.0;
  /// |w(R)| must end below event_tol * u0.
  double event_tol = 1e-10;
  /// Samples of the outer segment, geometric in r from r0 to R.
  int samples = 512;
  long max_steps = 2000000;
};

struct Trajectory {
  std::vector<double> r;
  std::vector<double> w;
  std::vector<double> w_prime;
  long steps = 0;
};

/// Integrates from (r0, u0, up0) to r_stop with an embedded 5(4) pair.
/// The trajectory holds the accepted step ends. Throws Overflow on blow-up
/// of |w'| and Convergence on step-size underflow.
Trajectory integrate_radial(const RadialSource& f, double r0, double u0, double up0, double r_stop,
                            const ShootOptions& opts = {});
Trajectory integrate_radial(const Nonlinearity& nl, double r0, double u0, double up0, double r_stop,
                            const ShootOptions& opts = {});

/// Values at prescribed radii (increasing, first one r0), each reached by a
/// step that ends exactly there.
Trajectory integrate_radial_at(const RadialSource& f, double u0, double up0, const std::vector<double>& radii,
                               const ShootOptions& opts = {});

struct DirichletResult {
  double R = 0.0;
  double w_R = 0.0;         ///< w at R from a fresh integration ending there
  double w_prime_R = 0.0;
  double budget = 0.0;
  Trajectory samples;       ///< geometric in r on [r0, R]
  bool monotone = true;     ///< w' < 0 at every sample in (r0, R]
  long steps = 0;
};

/// Shoots outward with f continued below s0 (Nonlinearity::f_extended) and
/// locates the first zero of w. Throws Convergence when no sign change is
/// found before the budget radius.
DirichletResult find_dirichlet_radius(const RadialSource& f, double r0, double u0, double up0,
                                      const ShootOptions& opts = {});
DirichletResult find_dirichlet_radius(const Nonlinearity& nl, double r0, double u0, double up0,
                                      const ShootOptions& opts = {});

/// Merges the inner segment (ending at r0) with the shot outer segment.
/// Throws InvalidArgument if they disagree at r0 by more than 1e-9.
RadialProfile assemble_full(const RadialProfile& inner, const DirichletResult& outer);

/// Shooting diagnostics that depend on the model comparison.
struct ShootDiagnostics {
  /// max |ratio - 1| of (u'/f(u)) / (v'/g(v)) over the innermost decade of rho.
  double slope_ratio_dev = 0.0;
  /// Same ratio at the matching radius.
  double slope_ratio_r0 = 0.0;
  /// min over outer samples of -r w' / (f(w) r^2 / 2); the chain holds when >= 1.
  double radial_flux_min = 0.0;
  std::size_t radial_flux_violations = 0;
};

ShootDiagnostics shoot_diagnostics(const RadialProfile& full, const Nonlinearity& nl, const ModelProblem& m);

nlohmann::json to_json(const DirichletResult& d);
nlohmann::json to_json(const ShootDiagnostics& d);

}  // namespace singulib
