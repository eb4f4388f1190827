#include "pdphase/betabinom.hpp"

#include <cmath>
#include <string>

#include "pdphase/error.hpp"

namespace pdphase {

ModelParams ModelParams::from_theta_rho(double theta, double rho_d) {
  if (!(theta > 0.0 && theta < 1.0))
    throw DomainError("theta must lie in (0, 1), got " + std::to_string(theta));
  if (!(rho_d > 0.0 && rho_d < 1.0))
    throw DomainError("rho_d must lie in (0, 1), got " + std::to_string(rho_d));
  const double z = (1.0 - rho_d) / rho_d;
  return {theta, rho_d, theta * z, (1.0 - theta) * z, z};
}

ModelParams ModelParams::from_alpha_beta(double alpha, double beta) {
  if (!(alpha > 0.0 && beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw DomainError("alpha and beta must be positive and finite");
  const double z = alpha + beta;
  return {alpha / z, 1.0 / (z + 1.0), alpha, beta, z};
}

double log_gamma(double x) noexcept {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_choose(Count n, Count k) {
  if (k < 0 || k > n) throw DomainError("log_choose: need 0 <= k <= n");
  return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
         log_gamma(static_cast<double>(n - k) + 1.0);
}

namespace {

long double log_gamma_l(long double x) noexcept {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// log Gamma(x + m) - log Gamma(x); direct sum for short runs, extended precision otherwise
long double log_rising(double x, double m) noexcept {
  if (m == 0.0) return 0.0L;
  if (m <= 16.0) {
    long double s = 0.0L;
    for (int i = 0; i < static_cast<int>(m); ++i) s += std::log(static_cast<long double>(x) + i);
    return s;
  }
  return log_gamma_l(static_cast<long double>(x) + m) - log_gamma_l(x);
}

} // namespace

double log_beta_ratio(Count k, Count n, double alpha, double beta) {
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  return static_cast<double>(log_rising(alpha, kd) + log_rising(beta, nd - kd) -
                             log_rising(alpha + beta, nd));
}

double log_pmf(Count k, Count n, double alpha, double beta) {
  if (n < 1) throw DomainError("log_pmf: n must be >= 1");
  if (k < 0 || k > n)
    throw DomainError("log_pmf: k = " + std::to_string(k) + " outside [0, n = " +
                      std::to_string(n) + "]");
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("log_pmf: alpha and beta must be positive");
  return log_choose(n, k) + log_beta_ratio(k, n, alpha, beta);
}

double binomial_log_pmf(Count k, Count n, double p) {
  if (k < 0 || k > n) throw DomainError("binomial_log_pmf: need 0 <= k <= n");
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  return log_choose(n, k) + kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

Count count_from_rate(double rate, Count n) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw DomainError("default rate must lie in [0, 1]");
  return static_cast<Count>(std::llround(rate * static_cast<double>(n)));
}

} // namespace pdphase
