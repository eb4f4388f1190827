#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pdphase {

enum class KernelFamily { Exponential, Power, Custom };

enum class Phase { Convergent, NonConvergent };

/// Outcome of the T-hat criterion: the process is estimable iff the limiting
/// kernel sum is finite.
struct ConvergenceClass {
  double t_hat = 0.0; ///< +infinity when the sum diverges
  Phase phase = Phase::Convergent;
};

/// Discount sequence d_0, d_1, ... with d_0 = 1, non-increasing, in [0, 1].
///
///   Exponential(r):  d_i = r^i,            0 < r <= 1
///   Power(gamma):    d_i = (1 + i)^-gamma, gamma > 0
///   Custom(d):       explicit finite sequence, zero beyond its support
class DecayKernel {
public:
  static DecayKernel exponential(double r);
  static DecayKernel power(double gamma);
  static DecayKernel custom(std::vector<double> d);

  /// Parses `exp:<r>`, `pow:<gamma>` or `custom:<d0,d1,...>`. Throws DomainError.
  static DecayKernel parse(std::string_view spec);

  KernelFamily family() const noexcept { return family_; }
  /// r or gamma; NaN for custom kernels.
  double parameter() const noexcept { return param_; }
  const std::vector<double>& support() const noexcept { return custom_; }

  double operator()(std::size_t i) const noexcept { return eval(i); }
  double eval(std::size_t i) const noexcept;

  /// sum_{i=0}^{t-1} d_i, i.e. the urn denominator sum_{s=1}^{t} d_{t-s}.
  double partial_sum(std::size_t t) const;

  /// d_0 .. d_{n-1}.
  std::vector<double> coefficients(std::size_t n) const;

  /// Smallest lag L with d_L < rel * d_0, capped at `cap`. For custom kernels
  /// this is min(support length, cap).
  std::size_t truncation_lag(double rel, std::size_t cap) const;

  ConvergenceClass classify() const;

  std::string to_string() const;

private:
  DecayKernel(KernelFamily f, double p, std::vector<double> d = {})
      : family_(f), param_(p), custom_(std::move(d)) {}

  KernelFamily family_;
  double param_;
  std::vector<double> custom_;
};

/// Asymptotic ratio C(t)/C(t-1) of the correlation function for d_i = r^i:
/// r + (1 - r) / ((alpha + beta)(1 - r) + 1). Defined for r in [0, 1).
double r_eff(double alpha, double beta, double r);

const char* to_string(KernelFamily f) noexcept;
const char* to_string(Phase p) noexcept;

} // namespace pdphase
