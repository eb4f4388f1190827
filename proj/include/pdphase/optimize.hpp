#pragma once

#include <functional>

namespace pdphase {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Stops when `done(a, b)` holds for the current bracket or after
/// `max_iterations` shrink steps. The bracket ends themselves are also
/// evaluated, so a maximum sitting exactly on an edge is returned exactly.
ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                      const std::function<bool(double, double)>& done,
                                      int max_iterations = 200);

/// Bisection for a sign change of f on [lo, hi]; requires f(lo) and f(hi) of
/// opposite sign (throws NoRoot otherwise). Returns the midpoint of the final
/// bracket of width <= tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

} // namespace pdphase
