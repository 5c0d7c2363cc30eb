#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace ptq {

/// Bisection for a sign change of f on [lo, hi]. Returns nullopt when f(lo)
/// and f(hi) share a sign. Stops once the bracket is narrower than tol.
template <typename F>
std::optional<double> bisect(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 200) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) return std::nullopt;
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct MinimumResult {
  double x;
  double value;
  int iterations;
};

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
template <typename F>
MinimumResult golden_section_minimize(F&& f, double lo, double hi, double tol = 1e-8,
                                      int max_iter = 500) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  int it = 0;
  for (; it < max_iter && hi - lo > tol; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x), it};
}

}  // namespace ptq
