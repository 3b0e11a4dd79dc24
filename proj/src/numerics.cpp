#include "singulib/numerics.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "singulib/error.hpp"

namespace singulib {

std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  if (n < m) throw Error(ErrorKind::InvalidArgument, "stencil too small for derivative order");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(m + 1), std::vector<double>(x.size(), 0.0));
  auto C = [&](int k, int j) -> double& { return c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]; };
  double c1 = 1.0, c4 = x[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = i < m ? i : m;
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[static_cast<std::size_t>(i)] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) C(k, i) = c1 * (k * C(k - 1, i - 1) - c5 * C(k, i - 1)) / c2;
        C(0, i) = -c1 * c5 * C(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) C(k, j) = (c4 * C(k, j) - k * C(k - 1, j)) / c3;
      C(0, j) = c4 * C(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::InvalidArgument, "line fit needs >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::vector<double> fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, int deg) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n <= deg || y.size() != x.size()) throw Error(ErrorKind::InvalidArgument, "too few points for polynomial fit");
  Eigen::MatrixXd A(n, deg + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= deg; ++k) {
      A(i, k) = p;
      p *= x[static_cast<std::size_t>(i)];
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return std::vector<double>(c.data(), c.data() + c.size());
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_default_threads(unsigned threads) { g_threads = threads; }

unsigned default_threads() {
  const unsigned t = g_threads.load();
  if (t > 0) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = default_threads();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_index = n;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace singulib
