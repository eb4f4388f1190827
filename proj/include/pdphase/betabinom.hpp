#pragma once

#include <cstdint>

namespace pdphase {

using Count = std::int64_t;

/// Beta-binomial parameters in their three equivalent forms:
///   theta = alpha / (alpha + beta)      long-run default probability
///   rho_d = 1 / (alpha + beta + 1)      within-period default correlation
///   z     = alpha + beta = (1 - rho_d) / rho_d
struct ModelParams {
  double theta = 0.0;
  double rho_d = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double z = 0.0;

  static ModelParams from_theta_rho(double theta, double rho_d);
  static ModelParams from_alpha_beta(double alpha, double beta);
};

/// log Gamma for positive arguments; reentrant (no global signgam write).
double log_gamma(double x) noexcept;

/// log C(n, k).
double log_choose(Count n, Count k);

/// log [B(alpha + k, beta + n - k) / B(alpha, beta)]: the parameter-dependent
/// part of the beta-binomial log mass.
double log_beta_ratio(Count k, Count n, double alpha, double beta);

/// Natural log of the beta-binomial mass C(n,k) B(alpha+k, beta+n-k) / B(alpha, beta).
/// Throws DomainError for k outside [0, n], n < 1, or non-positive alpha/beta.
double log_pmf(Count k, Count n, double alpha, double beta);

/// Binomial log mass; the rho_d -> 0 limit of log_pmf.
double binomial_log_pmf(Count k, Count n, double p);

/// Default count from a reported default rate: round(rate * n).
Count count_from_rate(double rate, Count n);

} // namespace pdphase
