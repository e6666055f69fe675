#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tailor {

/// Composite trapezoid with interval doubling until two successive
/// refinements agree to rel_tol. Suited to smooth integrands on finite
/// intervals; heavy tails are handled by the callers via closed forms.
template <typename F>
double adaptive_trapezoid(F&& f, double a, double b, double rel_tol = 1e-8,
                          int max_doublings = 26) {
  if (!(b >= a)) throw std::invalid_argument("adaptive_trapezoid: b < a");
  if (a == b) return 0.0;
  double h = b - a;
  double estimate = 0.5 * h * (f(a) + f(b));
  std::int64_t n = 1;
  for (int pass = 0; pass < max_doublings; ++pass) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += f(a + h * (0.5 + i));
    const double refined = 0.5 * (estimate + h * sum);
    n *= 2;
    h *= 0.5;
    const double diff = std::fabs(refined - estimate);
    estimate = refined;
    if (pass >= 3 && diff <= rel_tol * (std::fabs(refined) + 1e-300))
      return estimate;
  }
  return estimate;
}

}  // namespace tailor
