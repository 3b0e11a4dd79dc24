#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace singulib {

/// Finite-difference weights (Fornberg): w[k][j] is the weight of f(x[j])
/// in the k-th derivative at z, for k = 0..m.
std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int m);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;  ///< root-mean-square residual
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares polynomial coefficients c[0] + c[1] x + ... + c[deg] x^deg.
std::vector<double> fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, int deg);

/// n points from lo to hi, equally spaced in log.
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);

/// Process-wide default worker count (CLI --threads); 0 means hardware.
void set_default_threads(unsigned threads);
unsigned default_threads();

/// Runs body(i) for i in [0, n) on a small thread pool. Exceptions are
/// rethrown on the calling thread (the one from the lowest index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace singulib
