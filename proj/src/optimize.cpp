#include "pdphase/optimize.hpp"

#include <cmath>
#include <utility>

#include "pdphase/error.hpp"

namespace pdphase {

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                      const std::function<bool(double, double)>& done,
                                      int max_iterations) {
  if (lo > hi) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarOptimum best{lo, f(lo), 1};
  auto consider = [&best](double x, double v) {
    if (v > best.value) {
      best.x = x;
      best.value = v;
    }
  };
  if (hi == lo) return best;
  consider(hi, f(hi));
  ++best.evaluations;

  double a = lo, b = hi;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  double fc = f(c), fd = f(d);
  best.evaluations += 2;
  consider(c, fc);
  consider(d, fd);

  for (int it = 0; it < max_iterations && !done(a, b); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = f(d);
      consider(d, fd);
    }
    ++best.evaluations;
  }
  return best;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NoRoot("bisect: no sign change on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace pdphase
