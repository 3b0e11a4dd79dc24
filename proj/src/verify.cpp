#include "singulib/verify.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "singulib/error.hpp"
#include "singulib/model.hpp"
#include "singulib/numerics.hpp"

namespace singulib {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kInnerHalfWidth = 6;  // 13-point stencil

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// (e^{1-rho}/4) f(u), the inner-segment source, in log form.
double inner_source(const Nonlinearity& nl, double rho, double u) {
  return std::exp(1.0 - rho - std::log(4.0) + nl.log_f_extended(u));
}

// Smooth step from 0 (x <= 0) to 1 (x >= 1) and its derivative.
double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double h = 1.0 / x - 1.0 / (1.0 - x);
  if (h > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(h));
}

double smooth_step_prime(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double S = smooth_step(x);
  return S * (1.0 - S) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)));
}

// Cut-off Phi(l) = 1 for l <= 1, 0 for l >= 2.
double cutoff(double l) { return 1.0 - smooth_step(l - 1.0); }
double cutoff_prime(double l) { return -smooth_step_prime(l - 1.0); }

struct Bump {
  double a, A;
  int k;
  double value(double r) const {
    if (r >= a) return 0.0;
    const double s = (r / a) * (r / a);
    return A * std::pow(1.0 - s, k);
  }
  // phi'(r) r
  double flux(double r) const {
    if (r >= a) return 0.0;
    const double s = (r / a) * (r / a);
    return -2.0 * A * k * s * std::pow(1.0 - s, k - 1);
  }
  // (Laplacian phi) r^2
  double lap_r2(double r) const {
    if (r >= a) return 0.0;
    const double s = (r / a) * (r / a);
    return 4.0 * A * k * s * (-std::pow(1.0 - s, k - 1) + (k - 1) * s * std::pow(1.0 - s, k - 2));
  }
};

template <class F>
double integrate_pieces(F f, std::vector<double> breaks) {
  using boost::math::quadrature::gauss_kronrod;
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    if (!(hi > lo)) continue;
    // Map to [-1, 1]: Boost leaves the reported error unscaled otherwise.
    const double half = 0.5 * (hi - lo), mid = lo + half;
    auto g = [&](double y) { return f(mid + half * y); };
    total += half * gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, 12, 1e-13);
  }
  return total;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
  return out;
}

}  // namespace

RadialProfile model_profile(const ModelProblem& m, std::vector<double> rho) {
  std::sort(rho.begin(), rho.end(), std::greater<>());
  RadialProfile p;
  for (double x : rho) {
    ProfileNode n;
    n.rho = x;
    n.u = m.psi(x);
    n.u_rho = m.psi_prime(x);
    n.phi = n.u;
    n.eta = 0.0;
    p.nodes.push_back(n);
  }
  if (!rho.empty()) {
    p.rho0 = rho.back();
    p.r0 = std::exp(0.5 * (1.0 - p.rho0));
  }
  return p;
}

// ---------------------------------------------------------------------------

ProfileInterpolant::ProfileInterpolant(const RadialProfile& p, const Nonlinearity& nl) {
  const auto inner = p.segment(Segment::InnerConstructed);
  if (inner.size() < 2) throw Error(ErrorKind::InvalidArgument, "profile needs an inner segment");
  for (auto it = inner.rbegin(); it != inner.rend(); ++it) {
    inner_.push_back({it->rho, it->u, it->u_rho, -inner_source(nl, it->rho, it->u)});
  }
  rho_split_ = inner_.front().x;
  rho_hi_ = inner_.back().x;
  rho_lo_ = rho_split_;
  const auto outer = p.segment(Segment::OuterShot);
  if (!outer.empty()) {
    auto knot = [&](const ProfileNode& n) {
      const double r = static_cast<double>(n.r());
      const double up = static_cast<double>(n.u_prime());
      return Knot{r, n.u, up, -up / r - nl.f_extended(n.u)};
    };
    outer_.push_back(knot(inner.back()));
    for (const auto& n : outer) outer_.push_back(knot(n));
    rho_lo_ = outer.back().rho;
  }
}

void ProfileInterpolant::hermite(const std::vector<Knot>& k, double x, double& y, double& d1) {
  auto it = std::upper_bound(k.begin(), k.end(), x, [](double v, const Knot& kn) { return v < kn.x; });
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - k.begin()) - 1));
  i = std::min(i, k.size() - 2);
  const Knot& a = k[i];
  const Knot& b = k[i + 1];
  const double h = b.x - a.x;
  const double t = (x - a.x) / h, t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double H3 = 0.5 * (t3 - 2 * t4 + t5);
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
  const double G0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double G1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double G2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
  const double G3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
  const double G4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double G5 = 30 * t2 - 60 * t3 + 30 * t4;
  y = a.y * H0 + h * a.d1 * H1 + h * h * a.d2 * H2 + h * h * b.d2 * H3 + h * b.d1 * H4 + b.y * H5;
  d1 = (a.y * G0 + h * a.d1 * G1 + h * h * a.d2 * G2 + h * h * b.d2 * G3 + h * b.d1 * G4 + b.y * G5) / h;
}

void ProfileInterpolant::eval(double rho, double& u, double& u_rho) const {
  if (rho >= rho_split_ || outer_.empty()) {
    hermite(inner_, rho, u, u_rho);
    return;
  }
  const double r = std::exp(0.5 * (1.0 - rho));
  double up = 0.0;
  hermite(outer_, r, u, up);
  u_rho = -0.5 * r * up;
}

// ---------------------------------------------------------------------------

ResidualResult ode_residual(const RadialProfile& p, const Nonlinearity& nl) {
  ResidualResult res;
  res.per_node.assign(p.nodes.size(), kNaN);
  std::vector<std::size_t> inner, outer;
  for (std::size_t i = 0; i < p.nodes.size(); ++i)
    (p.nodes[i].segment == Segment::InnerConstructed ? inner : outer).push_back(i);
  if (inner.size() < static_cast<std::size_t>(2 * kInnerHalfWidth + 1)) throw Error(ErrorKind::InvalidArgument, "ode_residual: insufficient inner nodes");
  if (!outer.empty() && outer.size() < 7) {
    throw Error(ErrorKind::InvalidArgument, "ode_residual: insufficient outer nodes");
  }

  // Inner: u_rho_rho = (d u_rho / dt) / (2 t) with t = sqrt(rho), in which
  // the grid is uniform. Differentiating u_rho once avoids the cancellation
  // a second difference of u would suffer at large rho.
  const std::size_t hw = kInnerHalfWidth;
  const std::size_t width = static_cast<std::size_t>(2 * hw + 1);
  for (std::size_t k = 0; k < inner.size(); ++k) {
    const std::size_t start = std::min(k - std::min<std::size_t>(k, hw), inner.size() - width);
    std::vector<double> t(width), v(width);
    for (std::size_t j = 0; j < width; ++j) {
      const auto& n = p.nodes[inner[start + j]];
      t[j] = std::sqrt(n.rho);
      v[j] = n.u_rho;
    }
    const auto& node = p.nodes[inner[k]];
    const double tc = std::sqrt(node.rho);
    const auto w = fornberg_weights(tc, t, 1);
    double dt = 0.0;
    for (std::size_t j = 0; j < width; ++j) dt += w[1][j] * v[j];
    const double urr = dt / (2.0 * tc);
    const double S = inner_source(nl, node.rho, node.u);
    const double rel = std::abs(urr + S) / S;
    res.per_node[inner[k]] = rel;
    res.inner_max = std::max(res.inner_max, rel);
  }

  // Outer: u'' from a 7-point stencil on u'. The continuation of f below s0
  // is only C^1, so windows never straddle the crossing u = s0.
  const double s0 = nl.s0();
  auto side = [&](std::size_t k) { return p.nodes[outer[k]].u >= s0; };
  for (std::size_t k = 0; k < outer.size(); ++k) {
    std::size_t lo = k, hi = k;
    while (lo > 0 && k - lo < 3 && side(lo - 1) == side(k)) --lo;
    while (hi + 1 < outer.size() && hi - lo < 6 && side(hi + 1) == side(k)) ++hi;
    while (lo > 0 && hi - lo < 6 && side(lo - 1) == side(k)) --lo;
    if (hi - lo < 6 || k == 0 || k + 1 == outer.size()) continue;
    std::vector<double> r(7), up(7);
    for (std::size_t j = 0; j < 7; ++j) {
      const auto& n = p.nodes[outer[lo + j]];
      r[j] = static_cast<double>(n.r());
      up[j] = static_cast<double>(n.u_prime());
    }
    const auto& node = p.nodes[outer[k]];
    const double rc = static_cast<double>(node.r());
    const double upc = static_cast<double>(node.u_prime());
    const auto w = fornberg_weights(rc, r, 1);
    double upp = 0.0;
    for (std::size_t j = 0; j < 7; ++j) upp += w[1][j] * up[j];
    const double f = nl.f_extended(node.u);
    const double t2 = upc / rc;
    const double scale = std::max({std::abs(upp), std::abs(t2), f});
    const double rel = std::abs(upp + t2 + f) / scale;
    res.per_node[outer[k]] = rel;
    res.outer_max = std::max(res.outer_max, rel);
  }
  res.max_rel = std::max(res.inner_max, res.outer_max);
  return res;
}

// ---------------------------------------------------------------------------

std::optional<MainTerm> main_term(const FamilySpec& spec) {
  MainTerm m;
  switch (spec.family) {
    case Family::PowerExp: {
      const double q = spec.q, r = spec.r;
      const double c1 = (2.0 * q + r - 1.0) / q;
      const double c0 = std::log(4.0 * (q - 1.0) / (q * q));
      m.name = "power_exp";
      m.expected_order = 2.0 - 1.0 / q;
      m.log_factor = true;
      m.u = [=](double rho) {
        const double X = rho - 1.0;
        return std::pow(X - c1 * std::log(X) + c0, 1.0 / q);
      };
      return m;
    }
    case Family::SumExp: {
      const double q = spec.q, r = spec.r;
      if (!(r > 0.0 && r < q / 2.0)) return std::nullopt;
      const double k = r / q;
      const double qp = q / (q - 1.0);
      // n is the integer with 1/(1-k) < n <= 1/(1-k) + 1.
      const int n = static_cast<int>(std::floor(1.0 / (1.0 - k))) + 1;
      m.name = "sum_exp";
      m.expected_order = 2.0 - 1.0 / q - k;
      m.u = [=](double rho) {
        const double W = rho - 1.0 - std::log(rho) - std::log(qp / 4.0);
        double brace = W - (q - 1.0) / q * std::log(W);
        for (int j = 0; j <= n - 2; ++j) brace += std::pow(k, j) * std::pow(W, (j + 1) * k - j);
        const double inside = W - std::pow(brace, k) - (q - 1.0) / q * std::log(W) + std::log(1.0 / q);
        return std::pow(inside, 1.0 / q);
      };
      return m;
    }
    case Family::IterExp: {
      if (spec.q != 1.0) return std::nullopt;
      m.name = "iter_exp";
      m.expected_order = 2.0;
      m.log_factor = true;
      m.u = [](double rho) {
        const double W = rho - 1.0 - std::log(rho) + std::log(4.0);
        return std::log(W - std::log(W));
      };
      return m;
    }
    case Family::Model: {
      const auto model = build_model(spec.B);
      m.name = "model";
      m.exact = true;
      m.u = [model](double rho) { return model.psi(rho); };
      return m;
    }
    default:
      return std::nullopt;
  }
}

ExpansionFit expansion_compare(const RadialProfile& p, const MainTerm& main, double rho_lo, double rho_hi) {
  ExpansionFit fit;
  fit.name = main.name;
  fit.expected = main.expected_order;
  fit.log_factor = main.log_factor;
  fit.rho_lo = rho_lo;
  fit.rho_hi = rho_hi;
  std::vector<double> rho, dev;
  double u_max = 0.0;
  for (const auto& n : p.nodes) {
    if (n.segment != Segment::InnerConstructed || n.rho < rho_lo || n.rho > rho_hi) continue;
    rho.push_back(n.rho);
    dev.push_back(n.u - main.u(n.rho));
    u_max = std::max(u_max, std::abs(n.u));
  }
  fit.points = rho.size();
  if (rho.size() < 8) throw Error(ErrorKind::InvalidArgument, "expansion_compare: too few inner nodes in window");
  if (rho.front() / rho.back() < 10.0) {
    throw Error(ErrorKind::InvalidArgument, "expansion_compare: window spans less than a decade of rho");
  }
  for (double d : dev) fit.max_abs_dev = std::max(fit.max_abs_dev, std::abs(d));

  if (main.exact || fit.max_abs_dev <= 1e-9 * std::max(1.0, u_max)) {
    fit.skipped = true;
    fit.pass = fit.max_abs_dev <= 1e-9 * std::max(1.0, u_max);
    fit.note = fit.pass ? "deviation at round-off level; fit skipped"
                        : "main term is exact but deviation is " + num(fit.max_abs_dev);
    return fit;
  }

  auto fit_window = [&](double lo, double hi, double* rms) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] < lo || rho[i] > hi || dev[i] == 0.0) continue;
      const double z = 0.5 * (rho[i] - 1.0);
      x.push_back(std::log(z));
      y.push_back(std::log(std::abs(dev[i])) - (main.log_factor ? std::log(std::log(z)) : 0.0));
    }
    if (x.size() < 4) return kNaN;
    const LineFit lf = fit_line(x, y);
    if (rms) *rms = lf.rms;
    return -lf.slope;
  };
  fit.alpha = fit_window(rho_lo, rho_hi, &fit.rms);
  fit.alpha_half_window = fit_window(std::sqrt(rho_lo * rho_hi), rho_hi, nullptr);

  // rho is decreasing along the nodes, so |d| should increase along them.
  for (std::size_t i = 1; i < dev.size(); ++i) {
    if (dev[i] * dev[0] <= 0.0 || std::abs(dev[i]) < std::abs(dev[i - 1]) * (1.0 - 1e-3)) {
      fit.reliable = false;
      fit.note = "|u - main| is not monotone in the window near rho = " + num(rho[i]);
      break;
    }
  }
  fit.pass = fit.reliable && std::isfinite(fit.alpha) && fit.alpha >= fit.expected - 0.15;
  return fit;
}

// ---------------------------------------------------------------------------

DistributionalRecord distributional_test(const RadialProfile& p, const Nonlinearity& nl, double B,
                                         const BumpTest& bump, const DistributionalOptions& opts) {
  if (opts.L_list.size() < 3) throw Error(ErrorKind::InvalidArgument, "distributional_test needs >= 3 cut-offs");
  const ProfileInterpolant ip(p, nl);
  const double L_max = *std::max_element(opts.L_list.begin(), opts.L_list.end());
  if (ip.rho_max() < 4.0 * L_max + 1.0) {
    throw Error(ErrorKind::InvalidArgument, "distributional_test: profile must reach rho = " + num(4.0 * L_max + 1.0));
  }
  const double z_a = -std::log(bump.radius);
  const double rho_a = 1.0 + 2.0 * z_a;
  if (rho_a < ip.rho_min()) {
    throw Error(ErrorKind::InvalidArgument, "distributional_test: bump radius exceeds the profile");
  }
  const Bump phi{bump.radius, bump.amplitude, bump.power};

  DistributionalRecord rec;
  rec.bump = bump;
  rec.expected = 1.0 / B;

  auto at = [&](double z, double& u, double& u_rho) { ip.eval(1.0 + 2.0 * z, u, u_rho); };
  const double z0 = 0.5 * (p.rho0 - 1.0);
  const double z_top = 0.5 * (ip.rho_max() - 1.0);

  // Scale: integral of f(u)|phi| over the profile's range.
  {
    auto g = [&](double z) {
      double u, ur;
      at(z, u, ur);
      const double r = std::exp(-z);
      return std::exp(nl.log_f_extended(u) - 2.0 * z) * std::abs(phi.value(r));
    };
    std::vector<double> br = {z_a, z_top};
    if (z0 > z_a) br.push_back(z0);
    for (double z = std::max(z_a, 1.0) * 2.0; z < z_top; z *= 2.0) br.push_back(z);
    rec.scale = kTwoPi * integrate_pieces(g, br);
  }

  for (double L : opts.L_list) {
    DistributionalSample s;
    s.L = L;
    auto direct = [&](double z) {
      double u, ur;
      at(z, u, ur);
      const double r = std::exp(-z);
      const double fr2 = std::exp(nl.log_f_extended(u) - 2.0 * z);
      return cutoff(z / L) * (u * phi.lap_r2(r) + fr2 * phi.value(r));
    };
    auto grad = [&](double z) {
      double u, ur;
      at(z, u, ur);
      return 2.0 * phi.value(std::exp(-z)) * ur * cutoff_prime(z / L) / L;
    };
    auto test = [&](double z) {
      double u, ur;
      at(z, u, ur);
      return u * cutoff_prime(z / L) * phi.flux(std::exp(-z)) / L;
    };
    std::vector<double> br = linspace(L, 2.0 * L, 16);
    const auto br_cut = br;
    br.push_back(z_a);
    if (z0 > z_a && z0 < L) br.push_back(z0);
    for (double z = std::max(z_a, 1.0) * 2.0; z < L; z *= 2.0) br.push_back(z);
    s.J = kTwoPi * integrate_pieces(direct, br);
    s.T_grad = kTwoPi * integrate_pieces(grad, br_cut);
    s.T_test = kTwoPi * integrate_pieces(test, br_cut);
    rec.samples.push_back(s);
  }

  std::vector<double> x, y;
  for (const auto& s : rec.samples) {
    x.push_back(std::log(s.L));
    y.push_back(std::log(std::abs(s.T_grad + s.T_test)));
  }
  rec.alpha = -fit_line(x, y).slope;

  // J = J0 + c L^{-alpha} on the last decade of cut-offs.
  {
    std::vector<double> xs, ys;
    for (const auto& s : rec.samples) {
      if (s.L < L_max / 10.0) continue;
      xs.push_back(std::pow(s.L, -rec.alpha));
      ys.push_back(s.J);
    }
    rec.J0 = xs.size() >= 2 ? fit_line(xs, ys).intercept : rec.samples.back().J;
  }

  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    const double gap = std::abs(s.J - (s.T_grad + s.T_test)) / std::max(rec.scale, 1e-300);
    rec.max_identity_gap = std::max(rec.max_identity_gap, gap);
    if (i > 0 && std::abs(s.J) > std::abs(rec.samples[i - 1].J)) rec.monotone = false;
  }
  const bool trivial = bump.amplitude == 0.0;
  rec.pass = trivial || (std::abs(rec.alpha - rec.expected) <= opts.alpha_tolerance &&
                         std::abs(rec.J0) <= opts.J0_tolerance * rec.scale);
  return rec;
}

// ---------------------------------------------------------------------------

const char* to_string(BoundVerdict v) { return v == BoundVerdict::Holds ? "holds" : "not_reached"; }

std::vector<BoundCheck> bound_checks(const RadialProfile& p, const Nonlinearity& nl, double B,
                                     const std::vector<double>& sigmas) {
  const auto inner = p.segment(Segment::InnerConstructed);  // decreasing rho
  if (inner.size() < 5) throw Error(ErrorKind::InvalidArgument, "bound_checks: insufficient inner nodes");
  const double rho_top = inner.front().rho;
  if (rho_top < 1.0 + 12.0 * std::log(10.0)) {  // r = 1e-6
    throw Error(ErrorKind::InvalidArgument, "bound_checks: profile must reach r <= 1e-6");
  }
  std::vector<BoundCheck> out;
  auto scan = [&](BoundCheck& c, auto&& quantity) {
    // quantity <= 1 is the inequality; walk outward from the innermost node.
    c.rho_onset = rho_top;
    c.worst = -std::numeric_limits<double>::infinity();
    for (const auto& n : inner) {
      const double v = quantity(n);
      if (!(v <= 1.0)) break;
      c.rho_onset = n.rho;
      c.worst = std::max(c.worst, v);
    }
    c.verdict = c.rho_onset <= 0.1 * rho_top ? BoundVerdict::Holds : BoundVerdict::NotReached;
  };
  for (double sigma : sigmas) {
    BoundCheck s1{"u_upper", sigma, BoundVerdict::NotReached, 0.0, 0.0, ""};
    scan(s1, [&](const ProfileNode& n) { return n.u / std::pow(n.rho - 1.0, 1.0 - 1.0 / B + sigma); });
    s1.detail = "u / (rho-1)^(1-1/B+sigma)";
    out.push_back(s1);

    BoundCheck s2{"gradient_upper", sigma, BoundVerdict::NotReached, 0.0, 0.0, ""};
    scan(s2, [&](const ProfileNode& n) { return 2.0 * std::abs(n.u_rho) * std::pow(n.rho - 1.0, 1.0 / B - sigma); });
    s2.detail = "|u'| r (rho-1)^(1/B-sigma)";
    out.push_back(s2);

    BoundCheck s3{"f_lower", sigma, BoundVerdict::NotReached, 0.1 * rho_top, 0.0, ""};
    std::vector<double> x, y;
    for (const auto& n : inner) {
      if (n.rho < 0.1 * rho_top) break;
      x.push_back(std::log(n.rho));
      y.push_back(nl.log_f_extended(n.u) + 1.0 - n.rho + (1.0 + 1.0 / B + sigma) * std::log(n.rho));
    }
    s3.worst = x.size() >= 2 ? fit_line(x, y).slope : kNaN;
    s3.verdict = s3.worst >= 0.0 ? BoundVerdict::Holds : BoundVerdict::NotReached;
    s3.detail = "log-slope of f(u) r^2 rho^(1+1/B+sigma) on the top decade";
    out.push_back(s3);
  }
  return out;
}

FFBand ff_band(const TransformF& t, const ModelProblem& m, double rho_lo, double rho_hi, int points) {
  FFBand band;
  band.rho_lo = rho_lo;
  band.rho_hi = rho_hi;
  const auto grid = geometric_grid(rho_lo, rho_hi, static_cast<std::size_t>(points));
  std::vector<double> vals(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double s = phi(m, t, grid[i]);
    vals[i] = std::pow(grid[i], 1.0 / m.B()) * t.functionals(s).H;
  });
  band.min = *std::min_element(vals.begin(), vals.end());
  band.max = *std::max_element(vals.begin(), vals.end());
  band.ratio = band.max / band.min;
  band.pass = band.min > 0.0 && band.ratio <= 10.0;
  return band;
}

std::vector<std::pair<double, double>> energy_trend(const RadialProfile& p) {
  auto inner = p.segment(Segment::InnerConstructed);
  std::reverse(inner.begin(), inner.end());  // increasing rho
  std::vector<std::pair<double, double>> out;
  if (inner.size() < 2) return out;
  double acc = 0.0;
  double next = inner.front().rho * 10.0;
  for (std::size_t i = 1; i < inner.size(); ++i) {
    const auto& a = inner[i - 1];
    const auto& b = inner[i];
    acc += (b.rho - a.rho) * (a.u_rho * a.u_rho + b.u_rho * b.u_rho);  // 2 * trapezoid
    if (b.rho >= next) {
      out.emplace_back(b.rho, acc);
      next *= 10.0;
    }
  }
  out.emplace_back(inner.back().rho, acc);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ExpansionFit& f) {
  nlohmann::json j = {{"name", f.name},
                      {"fitted_order", f.alpha},
                      {"expected_order", f.expected},
                      {"log_factor", f.log_factor},
                      {"fitted_order_half_window", f.alpha_half_window},
                      {"rms", f.rms},
                      {"rho_window", {f.rho_lo, f.rho_hi}},
                      {"points", f.points},
                      {"max_abs_deviation", f.max_abs_dev},
                      {"reliable", f.reliable},
                      {"skipped", f.skipped},
                      {"pass", f.pass}};
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

nlohmann::json to_json(const DistributionalRecord& d) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : d.samples) {
    samples.push_back({{"minus_log_eps", s.L}, {"J", s.J}, {"T_grad_u", s.T_grad}, {"T_grad_phi", s.T_test}});
  }
  return {{"bump", {{"radius", d.bump.radius}, {"power", d.bump.power}, {"amplitude", d.bump.amplitude}}},
          {"samples", samples},
          {"decay_exponent", d.alpha},
          {"expected_exponent", d.expected},
          {"J_extrapolated", d.J0},
          {"scale_int_f_abs_phi", d.scale},
          {"max_identity_gap", d.max_identity_gap},
          {"monotone", d.monotone},
          {"pass", d.pass}};
}

nlohmann::json to_json(const BoundCheck& b) {
  return {{"name", b.name},     {"sigma", b.sigma},  {"verdict", to_string(b.verdict)},
          {"rho_onset", b.rho_onset}, {"worst", b.worst}, {"quantity", b.detail}};
}

nlohmann::json to_json(const FFBand& b) {
  return {{"rho_window", {b.rho_lo, b.rho_hi}}, {"min", b.min}, {"max", b.max}, {"ratio", b.ratio}, {"pass", b.pass}};
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["residual_max_rel"] = r.residual.max_rel;
  j["residual_inner_max_rel"] = r.residual.inner_max;
  j["residual_outer_max_rel"] = r.residual.outer_max;
  j["expansion_fits"] = nlohmann::json::array();
  if (r.expansion) j["expansion_fits"].push_back(to_json(*r.expansion));
  j["distributional"] = nlohmann::json::array();
  for (const auto& d : r.distributional) j["distributional"].push_back(to_json(d));
  j["bounds"] = nlohmann::json::array();
  for (const auto& b : r.bounds) j["bounds"].push_back(to_json(b));
  if (r.ff) j["fF_band"] = to_json(*r.ff);
  j["energy_trend"] = nlohmann::json::array();
  for (const auto& [rho, e] : r.energy) j["energy_trend"].push_back({{"rho", rho}, {"energy", e}});
  j["notes"] = r.notes;
  return j;
}

}  // namespace singulib
