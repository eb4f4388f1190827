#pragma once

// Reference computations for the tests. Each one is written from the textbook
// definition and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

namespace oracle {

/// Beta-binomial mass by rising factorials:
/// C(n,k) (a)_k (b)_{n-k} / (a+b)_n.
inline double beta_binomial_pmf(int k, int n, double a, double b) {
  double p = 1.0;
  for (int i = 1; i <= k; ++i) p *= static_cast<double>(n - k + i) / i;
  for (int i = 0; i < k; ++i) p *= a + i;
  for (int i = 0; i < n - k; ++i) p *= b + i;
  for (int i = 0; i < n; ++i) p /= a + b + i;
  return p;
}

/// Probability of the single-draw discounted urn path x(1..T):
/// each step uses Z_d(t) = (a + sum x(s) d_{t-s}) / (a + b + sum d_{t-s}).
inline double urn_path_probability(const std::vector<int>& x, double a, double b,
                                   const std::function<double(int)>& d) {
  double p = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    double num = a, den = a + b;
    for (std::size_t s = 0; s < t; ++s) {
      num += x[s] * d(static_cast<int>(t - 1 - s));
      den += d(static_cast<int>(t - 1 - s));
    }
    const double z = num / den;
    p *= x[t] ? z : 1.0 - z;
  }
  return p;
}

/// Probability that a multi-period urn (period i is a plain Polya urn
/// started from alpha + sum_{l<i} d_{i-l} k_l, beta + ...) produces counts k,
/// summed over all orderings of the draws.
inline double multi_period_probability(const std::vector<int>& n, const std::vector<int>& k,
                                       double a, double b,
                                       const std::function<double(int)>& d) {
  double p = 1.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    double ai = a, bi = b;
    for (std::size_t l = 0; l < i; ++l) {
      ai += d(static_cast<int>(i - l)) * k[l];
      bi += d(static_cast<int>(i - l)) * (n[l] - k[l]);
    }
    // sum over all 2^n_i orderings with k_i ones
    double period = 0.0;
    for (unsigned mask = 0; mask < (1u << n[i]); ++mask) {
      if (__builtin_popcount(mask) != k[i]) continue;
      double q = 1.0;
      int hits = 0;
      for (int m = 0; m < n[i]; ++m) {
        const double z = (ai + hits) / (ai + bi + m);
        const bool one = (mask >> m) & 1u;
        q *= one ? z : 1.0 - z;
        hits += one;
      }
      period += q;
    }
    p *= period;
  }
  return p;
}

/// C(t) straight from the recursion, O(T^2), in long double.
inline std::vector<double> corr_naive(double a, double b, const std::function<double(int)>& d,
                                      int horizon) {
  std::vector<long double> c(horizon + 1);
  c[0] = 1.0L;
  for (int t = 1; t <= horizon; ++t) {
    long double num = 0.0L, den = a + b;
    for (int s = 1; s <= t; ++s) {
      num += c[s - 1] * d(t - s);
      den += d(t - s);
    }
    c[t] = num / den;
  }
  return {c.begin(), c.end()};
}

/// t -> infinity limit of the critical-exponent equation:
/// alpha + beta = -psi(1 - delta) - gamma_E.
inline double critical_limit_rhs(double delta) {
  return -boost::math::digamma(1.0 - delta) - std::numbers::egamma;
}

inline double critical_limit_delta(double alpha_plus_beta) {
  double lo = 0.0, hi = 1.0 - 1e-15;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (critical_limit_rhs(mid) < alpha_plus_beta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// sum_{i>=0} (1+i)^-gamma = zeta(gamma).
inline double power_t_hat(double gamma) { return boost::math::zeta(gamma); }

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / x.size() - double(j) / y.size()));
  }
  return d;
}

/// Asymptotic two-sample KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
  return 1.6276 * std::sqrt(double(n + m) / (double(n) * double(m)));
}

inline std::vector<double> beta_draws(double a, double b, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  std::vector<double> out(count);
  for (auto& v : out) {
    const double x = ga(gen), y = gb(gen);
    v = x / (x + y);
  }
  return out;
}

/// Circular autocovariance (1/n) sum_t y_t y_{(t+h) mod n} of the mean-removed series.
inline std::vector<double> circular_autocovariance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  std::vector<double> c(n, 0.0);
  for (std::size_t h = 0; h < n; ++h) {
    long double s = 0.0L;
    for (std::size_t t = 0; t < n; ++t) s += (x[t] - mean) * (x[(t + h) % n] - mean);
    c[h] = static_cast<double>(s / n);
  }
  return c;
}

/// |DFT_k|^2 by direct summation.
inline double dft_power(const std::vector<double>& x, std::size_t k) {
  std::complex<long double> s = 0.0L;
  const std::size_t n = x.size();
  for (std::size_t t = 0; t < n; ++t) {
    const long double ang = -2.0L * std::numbers::pi_v<long double> * k * t / n;
    s += static_cast<long double>(x[t]) * std::complex<long double>(std::cos(ang), std::sin(ang));
  }
  return static_cast<double>(std::norm(s));
}

inline std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> e(0.0, 1.0);
  std::vector<double> x(n);
  double v = e(gen) / std::sqrt(1.0 - phi * phi);
  for (auto& out : x) {
    out = v;
    v = phi * v + e(gen);
  }
  return x;
}

/// Series whose periodogram is exactly c * f^-slope: deterministic amplitudes
/// f^(-slope/2) with uniform random phases, summed by direct cosines.
inline std::vector<double> power_law_series(double slope, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> amp(n / 2 + 1, 0.0), ph(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k < n / 2; ++k) {
    amp[k] = std::pow(double(k) / n, -slope / 2.0);
    ph[k] = phase(gen);
  }
  std::vector<double> x(n, 0.0);
  // Recurrence-free evaluation keeps rounding error independent of t.
  for (std::size_t k = 1; k < n / 2; ++k)
    for (std::size_t t = 0; t < n; ++t)
      x[t] += amp[k] * std::cos(2.0 * std::numbers::pi * double((k * t) % n) / n + ph[k]);
  return x;
}

} // namespace oracle
