#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

/// Adaptive Simpson quadrature.
inline double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                        int depth = 50) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_adaptive(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Integral split into equal panels (keeps narrow peaks from being missed).
inline double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                               double tol = 1e-13) {
  double total = 0.0;
  const double width = (b - a) / panels;
  for (int k = 0; k < panels; ++k) total += integrate(f, a + k * width, a + (k + 1) * width, tol / panels);
  return total;
}

/// Kahan-compensated sum in reverse order.
inline double kahan_sum_reversed(const std::vector<double>& v) {
  double sum = 0.0;
  double c = 0.0;
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    const double y = *it - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Argmax of f over `points` log-spaced values on [lo, hi].
inline double log_grid_argmax(const std::function<double(double)>& f, double lo, double hi, int points) {
  const double a = std::log(lo);
  const double b = std::log(hi);
  double best_x = lo;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double x = std::exp(a + (b - a) * k / (points - 1));
    const double v = f(x);
    if (v > best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return best_x;
}

/// Assignment minimising Σ_j |fitted[perm[j]] - truth[j]| by enumeration.
inline std::vector<std::size_t> best_assignment(const std::vector<double>& fitted, const std::vector<double>& truth) {
  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t j = 0; j < perm.size(); ++j) cost += std::fabs(fitted[perm[j]] - truth[j]);
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Single-Gamma MLE: bisection on the profiled score equation with ψ taken
/// from finite differences of std::lgamma.
struct GammaMle {
  double r;
  double theta;
};

inline GammaMle single_gamma_mle(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sl = 0.0;
  for (double v : x) {
    sx += v;
    sl += std::log(v);
  }
  const double mean_x = sx / n;
  const double mean_l = sl / n;
  auto psi = [](double r) {
    const double h = 1e-5 * std::max(1.0, r);
    return (std::lgamma(r + h) - std::lgamma(r - h)) / (2.0 * h);
  };
  // Score in r with θ profiled out: log r - ψ(r) - (log x̄ - mean log x) = 0.
  const double target = std::log(mean_x) - mean_l;
  double lo = 1e-6, hi = 1e7;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (std::log(mid) - psi(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r = std::sqrt(lo * hi);
  return {r, mean_x / r};
}

}  // namespace oracle
