#include "singulib/shoot.hpp"

#include <array>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "singulib/error.hpp"

namespace singulib {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;  // (w, w')
using Dopri = odeint::runge_kutta_dopri5<State>;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct RadialSystem {
  const RadialSource* f;
  void operator()(const State& x, State& dxdr, double r) const {
    dxdr[0] = x[1];
    dxdr[1] = -x[1] / r - (*f)(x[0]);
  }
};

void check_state(const State& x, double r) {
  if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || std::abs(x[1]) > 1e300) {
    throw Error(ErrorKind::Overflow, "radial integration blew up near r = " + num(r));
  }
}

void check_initial(double r0, double u0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw Error(ErrorKind::InvalidArgument, "integrate_radial needs r0 > 0");
  if (!std::isfinite(u0)) throw Error(ErrorKind::InvalidArgument, "integrate_radial needs a finite u0");
}

double initial_step(double r0, double r_stop) { return std::min(1e-3 * r0, 0.5 * (r_stop - r0)); }

// One-shot integration ending exactly at r_end.
State integrate_to(const RadialSource& f, State x, double r_from, double r_end, const ShootOptions& opts) {
  if (r_end == r_from) return x;
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, Dopri());
  try {
    odeint::integrate_adaptive(stepper, RadialSystem{&f}, x, r_from, r_end, initial_step(r_from, r_end));
  } catch (const odeint::step_adjustment_error& e) {
    throw Error(ErrorKind::Convergence, std::string("radial step size underflow: ") + e.what());
  }
  check_state(x, r_end);
  return x;
}

RadialSource source_of(const Nonlinearity& nl) {
  return [&nl](double w) { return nl.f_extended(w); };
}

}  // namespace

Trajectory integrate_radial(const RadialSource& f, double r0, double u0, double up0, double r_stop,
                            const ShootOptions& opts) {
  check_initial(r0, u0);
  if (!(r_stop > r0)) throw Error(ErrorKind::InvalidArgument, "integrate_radial needs r_stop > r0");
  Trajectory out;
  State x{u0, up0};
  out.r.push_back(r0);
  out.w.push_back(u0);
  out.w_prime.push_back(up0);
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, Dopri());
  auto observer = [&](const State& s, double r) {
    check_state(s, r);
    if (r == r0) return;
    out.r.push_back(r);
    out.w.push_back(s[0]);
    out.w_prime.push_back(s[1]);
    if (++out.steps > opts.max_steps) throw Error(ErrorKind::Convergence, "radial integration step budget exhausted");
  };
  try {
    odeint::integrate_adaptive(stepper, RadialSystem{&f}, x, r0, r_stop, initial_step(r0, r_stop), observer);
  } catch (const odeint::step_adjustment_error& e) {
    throw Error(ErrorKind::Convergence, std::string("radial step size underflow: ") + e.what());
  }
  return out;
}

Trajectory integrate_radial(const Nonlinearity& nl, double r0, double u0, double up0, double r_stop,
                            const ShootOptions& opts) {
  return integrate_radial(source_of(nl), r0, u0, up0, r_stop, opts);
}

Trajectory integrate_radial_at(const RadialSource& f, double u0, double up0, const std::vector<double>& radii,
                               const ShootOptions& opts) {
  if (radii.empty()) return {};
  check_initial(radii.front(), u0);
  Trajectory out;
  State x{u0, up0};
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, Dopri());
  auto observer = [&](const State& s, double r) {
    check_state(s, r);
    out.r.push_back(r);
    out.w.push_back(s[0]);
    out.w_prime.push_back(s[1]);
  };
  const double dt = radii.size() > 1 ? initial_step(radii[0], radii[1]) : 1e-3 * radii[0];
  try {
    out.steps = static_cast<long>(odeint::integrate_times(stepper, RadialSystem{&f}, x, radii.begin(), radii.end(),
                                                          dt, observer));
  } catch (const odeint::step_adjustment_error& e) {
    throw Error(ErrorKind::Convergence, std::string("radial step size underflow: ") + e.what());
  }
  return out;
}

DirichletResult find_dirichlet_radius(const RadialSource& f, double r0, double u0, double up0,
                                      const ShootOptions& opts) {
  check_initial(r0, u0);
  if (!(u0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "find_dirichlet_radius needs u0 > 0, got " + num(u0));
  if (!(up0 < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "find_dirichlet_radius needs u'(r0) < 0, got " + num(up0));
  }
  // r w' is non-increasing while f > 0, so w(r) <= u0 + r0 up0 log(r / r0)
  // and the zero lies before r0 exp(u0 / (r0 |up0|)).
  const double a_priori = r0 * std::exp(std::min(700.0, u0 / (r0 * -up0))) * 1.01;
  const double budget = opts.r_budget > 0.0 ? opts.r_budget : a_priori;

  DirichletResult res;
  res.budget = budget;
  auto dense = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, Dopri());
  RadialSystem sys{&f};
  dense.initialize(State{u0, up0}, r0, initial_step(r0, budget));

  double r_lo = r0, r_hi = r0;
  State x_lo{u0, up0};
  bool found = false;
  try {
    while (dense.current_time() < budget) {
      const auto span = dense.do_step(sys);
      const State& x = dense.current_state();
      check_state(x, span.second);
      if (++res.steps > opts.max_steps) throw Error(ErrorKind::Convergence, "shooting step budget exhausted");
      if (x[0] <= 0.0) {
        r_lo = span.first;
        r_hi = span.second;
        found = true;
        break;
      }
      x_lo = x;
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw Error(ErrorKind::Convergence, std::string("radial step size underflow: ") + e.what());
  }
  if (!found) {
    throw Error(ErrorKind::Convergence, "no sign change of w before the budget radius " + num(budget));
  }

  // Root of the dense interpolant, then a check by integrating to R directly.
  State tmp;
  auto w_at = [&](double r) {
    dense.calc_state(r, tmp);
    return tmp[0];
  };
  double R = r_hi;
  if (w_at(r_hi) != 0.0) {
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * b; };
    const auto br = boost::math::tools::toms748_solve(w_at, r_lo, r_hi, x_lo[0], w_at(r_hi), tol, iters);
    R = 0.5 * (br.first + br.second);
  }
  State xR = integrate_to(f, x_lo, r_lo, R, opts);
  // A Newton step cleans up the interpolation error if needed.
  for (int k = 0; k < 3 && std::abs(xR[0]) > opts.event_tol * u0; ++k) {
    const double Rn = R - xR[0] / xR[1];
    xR = integrate_to(f, xR, R, Rn, opts);
    R = Rn;
  }
  res.R = R;
  res.w_R = xR[0];
  res.w_prime_R = xR[1];
  if (std::abs(res.w_R) > opts.event_tol * u0) {
    throw Error(ErrorKind::Convergence, "Dirichlet radius not resolved: |w(R)| = " + num(std::abs(res.w_R)));
  }

  const int n = std::max(opts.samples, 5);
  std::vector<double> radii(static_cast<std::size_t>(n));
  // Geometric spacing resolves the 1/r scale of u near r0.
  const double ratio = std::log(R / r0);
  for (int i = 0; i < n; ++i) radii[static_cast<std::size_t>(i)] = r0 * std::exp(ratio * i / (n - 1));
  radii.front() = r0;
  radii.back() = R;
  res.samples = integrate_radial_at(f, u0, up0, radii, opts);
  for (std::size_t i = 1; i < res.samples.r.size(); ++i) res.monotone = res.monotone && res.samples.w_prime[i] < 0.0;
  return res;
}

DirichletResult find_dirichlet_radius(const Nonlinearity& nl, double r0, double u0, double up0,
                                      const ShootOptions& opts) {
  return find_dirichlet_radius(source_of(nl), r0, u0, up0, opts);
}

RadialProfile assemble_full(const RadialProfile& inner, const DirichletResult& outer) {
  if (inner.nodes.empty() || outer.samples.r.empty()) {
    throw Error(ErrorKind::InvalidArgument, "assemble_full needs both segments");
  }
  const ProfileNode& last = inner.nodes.back();
  const double u_match = outer.samples.w.front();
  const double up_match = outer.samples.w_prime.front();
  const double du = std::abs(last.u - u_match);
  const double dup = std::abs(static_cast<double>(last.u_prime()) - up_match);
  if (du > 1e-9 * std::max(1.0, std::abs(last.u)) || dup > 1e-9 * std::max(1.0, std::abs(up_match))) {
    throw Error(ErrorKind::InvalidArgument,
                "segments do not match at r0: |du| = " + num(du) + ", |du'| = " + num(dup));
  }
  RadialProfile p = inner;
  p.R = outer.R;
  // The first outer sample is the shared matching point; skip it.
  for (std::size_t i = 1; i < outer.samples.r.size(); ++i) {
    ProfileNode node;
    const double r = outer.samples.r[i];
    node.rho = 1.0 - 2.0 * std::log(r);
    node.u = outer.samples.w[i];
    node.u_rho = -0.5 * r * outer.samples.w_prime[i];
    node.segment = Segment::OuterShot;
    p.nodes.push_back(node);
  }
  return p;
}

ShootDiagnostics shoot_diagnostics(const RadialProfile& full, const Nonlinearity& nl, const ModelProblem& m) {
  ShootDiagnostics d;
  const auto inner = full.segment(Segment::InnerConstructed);
  if (!inner.empty()) {
    // Along the inner segment u' / v' = u_rho / psi_rho at equal rho.
    auto ratio = [&](const ProfileNode& n) {
      const double psi = m.psi(n.rho);
      return n.u_rho / m.psi_prime(n.rho) * std::exp(m.log_g(psi) - nl.log_f_extended(n.u));
    };
    const double rho_top = inner.front().rho;
    for (const auto& n : inner) {
      if (n.rho < 0.1 * rho_top) break;
      d.slope_ratio_dev = std::max(d.slope_ratio_dev, std::abs(ratio(n) - 1.0));
    }
    d.slope_ratio_r0 = ratio(inner.back());
  }
  d.radial_flux_min = std::numeric_limits<double>::infinity();
  for (const auto& n : full.nodes) {
    if (n.segment != Segment::OuterShot) continue;
    const double r = static_cast<double>(n.r());
    const double lhs = -r * static_cast<double>(n.u_prime());
    const double rhs = nl.f_extended(n.u) * r * r / 2.0;
    const double q = lhs / rhs;
    d.radial_flux_min = std::min(d.radial_flux_min, q);
    if (q < 1.0) ++d.radial_flux_violations;
  }
  if (!std::isfinite(d.radial_flux_min)) d.radial_flux_min = 0.0;
  return d;
}

nlohmann::json to_json(const DirichletResult& d) {
  return {{"R", d.R},
          {"w_R", d.w_R},
          {"w_prime_R", d.w_prime_R},
          {"budget_radius", d.budget},
          {"monotone", d.monotone},
          {"steps", d.steps},
          {"samples", d.samples.r.size()}};
}

nlohmann::json to_json(const ShootDiagnostics& d) {
  return {{"slope_ratio_max_dev_innermost_decade", d.slope_ratio_dev},
          {"slope_ratio_at_r0", d.slope_ratio_r0},
          {"radial_flux_ratio_min", d.radial_flux_min},
          {"radial_flux_violations", d.radial_flux_violations}};
}

}  // namespace singulib
