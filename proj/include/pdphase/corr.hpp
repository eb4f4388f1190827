#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdphase/kernel.hpp"

namespace pdphase {

/// C(t) = E[X(t+1) | X(1)=1] - E[X(t+1) | X(1)=0] for t = 0..T, with the
/// running moments M_n(t) = sum_{s<t} C(s) s^n and
///   tau(t) = M_0(t),  xi(t) = sqrt(M_2(t) / M_0(t)).
/// All arrays have T + 1 entries indexed by t; tau(0) = xi(0) = 0.
struct CorrTrace {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> c;
  std::vector<double> m0, m1, m2;
  std::vector<double> tau;
  std::vector<double> xi;
  /// First t with C(t) > C(t-1), if any. Monotonicity is expected but unproven.
  std::optional<std::size_t> first_increase;

  std::size_t horizon() const noexcept { return c.empty() ? 0 : c.size() - 1; }
};

enum class CorrMethod { Auto, Direct, Fft };

/// Threshold above which Auto switches power/custom kernels to the FFT path.
inline constexpr std::size_t kCorrDirectMax = 10000;

/// Solves C(t) = sum_{s=1}^{t} C(s-1) d_{t-s} / (alpha + beta + sum_{s=1}^{t} d_{t-s}),
/// C(0) = 1. Exponential kernels use the exact two-term recurrence (O(T));
/// other kernels use direct convolution (O(T^2)) or online FFT convolution.
/// Throws InvariantViolation if any C(t) leaves [0, 1].
CorrTrace corr_recursion(double alpha, double beta, const DecayKernel& kernel, std::size_t horizon,
                         CorrMethod method = CorrMethod::Auto);

/// Memory-of-X(1) contribution to V(Z(t)):
///   (1/t^2) * alpha beta / (alpha + beta)^2 * (sum_{s<t} C(s))^2.
double variance_decomposition_term(double alpha, double beta, const CorrTrace& trace,
                                   std::size_t t);

/// log2(C(t) / C(2t)): the local power-law exponent of C.
double local_decay_exponent(const CorrTrace& trace, std::size_t t);

/// delta = 1 - log2(tau_ratio); tau_ratio in (1, 2].
double delta_from_tau_ratio(double tau_ratio);
/// delta = (1 - 3 xi_t^2) / (1 - xi_t^2); xi_t in [0, 1/sqrt(3)].
double delta_from_xi_t(double xi_t);

/// Asymptotic rows of the scaling table.
enum class Regime {
  Ordered,      ///< C(t) -> c > 0;                 xi_t = 1/sqrt(3)
  Critical,     ///< C ~ t^-delta, 0 < delta < 1;   xi_t in (0, 1/sqrt(3))
  Intermediate, ///< C ~ t^-delta, 1 < delta < 3;   xi_t = 0
  ShortRange,   ///< C ~ t^-delta, delta >= 3;      xi_t = 0
};

enum class FixedPoint { None, StableZero, StableInvSqrt3, Unstable };

struct FssPoint {
  double gamma = 0.0;
  double xi_over_t = 0.0; ///< xi(T) / T
  double xi_ratio = 0.0;  ///< xi(T) / xi(T/2)
  double tau_ratio = 0.0; ///< tau(T) / tau(T/2)
  double xi_ratio_prev = 0.0; ///< xi(T/2) / xi(T/4), for the horizon check
  double local_delta = 0.0;   ///< log2(C(T/2) / C(T))
  Regime regime = Regime::Ordered;
  /// Measured exponent within the tolerance of delta = 1 or 3, where the
  /// asymptotics carry log corrections.
  bool log_corrected = false;
  FixedPoint fixed_point = FixedPoint::None;
};

struct FssOptions {
  /// |xi(2t)/xi(t) - s| below this counts as sitting on a fixed point (s = 1, 2).
  double fixed_point_tol = 0.02;
  /// |measured exponent - boundary| below this is reported as log corrected.
  double boundary_tol = 0.02;
  /// Relative change of xi_ratio between the last two doublings that is still accepted.
  double horizon_tol = 0.05;
  /// Locate the unstable fixed point by bisection on gamma.
  bool locate_critical = true;
  double gamma_lo = 0.5;
  double gamma_hi = 1.5;
  double gamma_tol = 1e-3;
};

struct FssReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t horizon = 0;
  std::vector<FssPoint> points;

  /// Unstable fixed point (present when locate_critical was requested).
  std::optional<double> gamma_c;
  std::optional<double> xi_t_c;
  std::optional<double> tau_ratio_c;
  std::optional<double> delta_from_tau;
  std::optional<double> delta_from_xi;
};

/// Measures the FSS observables for a single power-law exponent.
FssPoint fss_point(double alpha, double beta, double gamma, std::size_t horizon,
                   const FssOptions& options = {});

/// FSS analysis over several power-law exponents at horizon T (ratios at the
/// doubling T/2 -> T). Throws InsufficientHorizon when xi(T)/xi(T/2) and
/// xi(T/2)/xi(T/4) differ by more than horizon_tol for any point.
FssReport fss_analysis(double alpha, double beta, std::span<const double> gammas,
                       std::size_t horizon, const FssOptions& options = {});

/// Right-hand side of the critical-exponent equation minus ln t, i.e.
///   integral_{1/(t+1)}^{t/(t+1)} mu^-delta (1 - mu)^-1 dmu - ln t,
/// evaluated as integral (mu^-delta - 1) / (1 - mu) over the same range.
double critical_equation_rhs(double delta, double t_cutoff);

/// Solves alpha + beta = critical_equation_rhs(delta, t_cutoff) for delta in
/// [0, 1] by bisection to 1e-6. Throws NoRoot when alpha + beta exceeds what
/// the cutoff can bracket (the right-hand side is bounded by ln t_cutoff).
double delta_critical(double alpha_plus_beta, double t_cutoff = 1e8);

const char* to_string(Regime r) noexcept;
const char* to_string(FixedPoint f) noexcept;

} // namespace pdphase
