#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace singulib {

/// Value bundled with its derivatives d^0..d^order with respect to one
/// variable. Entries are raw derivative values, not Taylor coefficients.
class Jet {
 public:
  static constexpr int kMaxOrder = 8;

  Jet() = default;
  explicit Jet(int order) : order_(order) {}

  static Jet constant(double value, int order) {
    Jet j(order);
    j.d_[0] = value;
    return j;
  }

  static Jet variable(double value, int order) {
    Jet j(order);
    j.d_[0] = value;
    if (order >= 1) j.d_[1] = 1.0;
    return j;
  }

  int order() const { return order_; }
  double operator[](int k) const { return d_[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return d_[static_cast<std::size_t>(k)]; }
  double value() const { return d_[0]; }

  /// Jet of the derivative: order drops by one.
  Jet derivative() const {
    Jet out(order_ > 0 ? order_ - 1 : 0);
    for (int k = 0; k <= out.order_; ++k) out[k] = d_[static_cast<std::size_t>(k + 1)];
    return out;
  }

  /// Same derivatives, truncated to a lower order.
  Jet truncated(int order) const {
    Jet out(order);
    for (int k = 0; k <= order; ++k) out[k] = d_[static_cast<std::size_t>(k)];
    return out;
  }

  bool all_finite() const {
    for (int k = 0; k <= order_; ++k)
      if (!std::isfinite(d_[static_cast<std::size_t>(k)])) return false;
    return true;
  }

 private:
  int order_ = 0;
  std::array<double, kMaxOrder + 1> d_{};
};

namespace detail {

inline double binomial(int n, int k) {
  static constexpr double table[Jet::kMaxOrder + 1][Jet::kMaxOrder + 1] = {
      {1},
      {1, 1},
      {1, 2, 1},
      {1, 3, 3, 1},
      {1, 4, 6, 4, 1},
      {1, 5, 10, 10, 5, 1},
      {1, 6, 15, 20, 15, 6, 1},
      {1, 7, 21, 35, 35, 21, 7, 1},
      {1, 8, 28, 56, 70, 56, 28, 8, 1},
  };
  return table[n][k];
}

inline int common_order(const Jet& a, const Jet& b) {
  return a.order() < b.order() ? a.order() : b.order();
}

}  // namespace detail

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet out(detail::common_order(a, b));
  for (int k = 0; k <= out.order(); ++k) out[k] = a[k] + b[k];
  return out;
}

inline Jet operator-(const Jet& a, const Jet& b) {
  Jet out(detail::common_order(a, b));
  for (int k = 0; k <= out.order(); ++k) out[k] = a[k] - b[k];
  return out;
}

inline Jet operator-(const Jet& a) {
  Jet out(a.order());
  for (int k = 0; k <= out.order(); ++k) out[k] = -a[k];
  return out;
}

inline Jet operator*(double c, const Jet& a) {
  Jet out(a.order());
  for (int k = 0; k <= out.order(); ++k) out[k] = c * a[k];
  return out;
}

// Leibniz rule.
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet out(detail::common_order(a, b));
  for (int n = 0; n <= out.order(); ++n) {
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += detail::binomial(n, k) * a[k] * b[n - k];
    out[n] = acc;
  }
  return out;
}

// h = a / b solves h*b = a term by term. Caller guarantees b[0] != 0.
inline Jet operator/(const Jet& a, const Jet& b) {
  Jet out(detail::common_order(a, b));
  for (int n = 0; n <= out.order(); ++n) {
    double acc = a[n];
    for (int k = 0; k < n; ++k) acc -= detail::binomial(n, k) * out[k] * b[n - k];
    out[n] = acc / b[0];
  }
  return out;
}

// h' = a' h
inline Jet exp(const Jet& a) {
  Jet out(a.order());
  out[0] = std::exp(a[0]);
  for (int n = 1; n <= out.order(); ++n) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += detail::binomial(n - 1, k) * a[k + 1] * out[n - 1 - k];
    out[n] = acc;
  }
  return out;
}

// h' a = a'. Caller guarantees a[0] > 0.
inline Jet log(const Jet& a) {
  Jet out(a.order());
  out[0] = std::log(a[0]);
  for (int n = 1; n <= out.order(); ++n) {
    double acc = a[n];
    for (int k = 1; k < n; ++k) acc -= detail::binomial(n - 1, k) * out[n - k] * a[k];
    out[n] = acc / a[0];
  }
  return out;
}

// h = a^p with h' a = p h a'. Caller guarantees a[0] != 0 (and a[0] > 0
// unless p is an integer).
inline Jet pow(const Jet& a, double p) {
  Jet out(a.order());
  out[0] = std::pow(a[0], p);
  for (int n = 1; n <= out.order(); ++n) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += p * detail::binomial(n - 1, k) * out[k] * a[n - k];
    for (int k = 1; k < n; ++k) acc -= detail::binomial(n - 1, k) * out[n - k] * a[k];
    out[n] = acc / a[0];
  }
  return out;
}

}  // namespace singulib
