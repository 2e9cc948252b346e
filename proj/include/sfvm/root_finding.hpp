#ifndef SFVM_ROOT_FINDING_HPP_
#define SFVM_ROOT_FINDING_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "sfvm/errors.hpp"

namespace sfvm {

struct InversionOptions {
  double tol = 1e-12;      // relative: |f(u) - value| <= tol * max(1, |value|)
  int max_bisections = 60;
  int max_iterations = 200;
};

/// Solve f(u) = value for an increasing f on [lo, hi] by Newton steps kept
/// inside a shrinking bracket, falling back to bisection. Values within the
/// tolerance of the image endpoints are mapped to the endpoints; anything
/// further out throws ValueOutsideImage.
template <class F, class DF>
double invert_monotone(F&& f, DF&& df, double lo, double hi, double value,
                       const InversionOptions& opt = {}) {
  const double scale = std::max(1.0, std::abs(value));
  const double accept = opt.tol * scale;
  const double flo = f(lo), fhi = f(hi);
  if (value < flo || value > fhi) {
    if (value < flo && flo - value <= accept) return lo;
    if (value > fhi && value - fhi <= accept) return hi;
    std::ostringstream msg;
    msg.precision(17);
    msg << "value " << value << " outside total flux image [" << flo << ", " << fhi << "]";
    throw ValueOutsideImage(msg.str(), value, flo, fhi);
  }
  if (flo == value) return lo;
  if (fhi == value) return hi;

  double a = lo, b = hi, ga = flo - value, gb = fhi - value;
  double x = a + (b - a) * (-ga) / (gb - ga);
  if (!(x > a && x < b)) x = 0.5 * (a + b);
  double best = x, best_res = std::numeric_limits<double>::infinity();
  int bisections = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double noise = 4.0 * eps * std::max({std::abs(flo), std::abs(fhi), std::abs(value)});
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double g = f(x) - value;
    if (std::abs(g) < best_res) {
      best = x;
      best_res = std::abs(g);
    }
    if (std::abs(g) <= noise) return x;
    if (g < 0) a = x; else b = x;
    if (b - a <= 4.0 * eps * std::max({1.0, std::abs(a), std::abs(b)})) break;
    const double d = df(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - g / d : a - 1.0;
    if (!(next > a && next < b)) {
      if (bisections >= opt.max_bisections) break;
      next = 0.5 * (a + b);
      ++bisections;
    }
    if (next == x) break;
    x = next;
  }
  if (best_res > accept) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "total flux inversion did not converge for value " << value << " (residual " << best_res
        << ")";
    throw ValueOutsideImage(msg.str(), value, flo, fhi);
  }
  return best;
}

}  // namespace sfvm

#endif  // SFVM_ROOT_FINDING_HPP_
