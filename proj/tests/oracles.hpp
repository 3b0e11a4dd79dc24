#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library, so agreement with it is a genuine cross-check.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Real = long double;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline std::pair<std::vector<Real>, std::vector<Real>> gauss_legendre(int n) {
  std::vector<Real> x(n), w(n);
  const Real pi = 3.141592653589793238462643383279502884L;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    Real dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1.0L, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0L);
      const Real dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-19L) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0L / ((1.0L - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite Gauss-Legendre (20 points per panel) on [a, b].
inline Real integrate(const std::function<Real(Real)>& f, Real a, Real b, int panels) {
  static const auto gl = gauss_legendre(20);
  const Real h = (b - a) / panels;
  Real total = 0.0L;
  for (int p = 0; p < panels; ++p) {
    const Real mid = a + (p + 0.5L) * h;
    Real acc = 0.0L;
    for (std::size_t k = 0; k < gl.first.size(); ++k) acc += gl.second[k] * f(mid + 0.5L * h * gl.first[k]);
    total += 0.5L * h * acc;
  }
  return total;
}

/// k-th central difference quotient, O(h^2).
inline Real central_difference(const std::function<Real(Real)>& f, Real s, int k, Real h) {
  Real binom = 1.0L, acc = 0.0L;
  for (int j = 0; j <= k; ++j) {
    acc += ((j % 2) ? -binom : binom) * f(s + (0.5L * k - j) * h);
    binom = binom * (k - j) / (j + 1);
  }
  return acc / std::pow(h, k);
}

/// k-th derivative by central differences with two Richardson levels
/// (error O(h^6)).
inline Real fd_derivative(const std::function<Real(Real)>& f, Real s, int k, Real h) {
  const Real d1 = central_difference(f, s, k, h);
  const Real d2 = central_difference(f, s, k, h / 2);
  const Real d3 = central_difference(f, s, k, h / 4);
  const Real r1 = (4 * d2 - d1) / 3, r2 = (4 * d3 - d2) / 3;
  return (16 * r2 - r1) / 15;
}

/// Model problem closed forms at B = 2.
inline double model2_G(double s) { return 0.5 * (s * s + 1.0) * std::exp(-s * s); }
inline double model2_v(double r) { return std::sqrt(-2.0 * std::log(r)); }

/// G(v(r)) in its r-form.
inline double G_of_v_identity(double B, double r) { return B / 4.0 * r * r * (std::log(1.0 / (r * r)) + 1.0); }

}  // namespace oracle
