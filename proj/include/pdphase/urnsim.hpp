#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pdphase/bayes.hpp"
#include "pdphase/betabinom.hpp"
#include "pdphase/kernel.hpp"

namespace pdphase {

/// Discounted Polya urn.
///
/// Without `periods`, one draw per step:
///   X(t+1) = 1{U_{t+1} <= Z_d(t)},
///   Z_d(t) = (alpha + sum_{s<=t} X(s) d_{t-s}) / (alpha + beta + sum_{s<=t} d_{t-s}).
///
/// With `periods` = (n_1, ..., n_P), period i is an ordinary Polya urn started
/// from the adjusted parameters (alpha_i, beta_i) of the multi-period
/// posterior, so the per-period default counts follow exactly the likelihood
/// used by map_estimate.
struct UrnConfig {
  double alpha = 1.0;
  double beta = 1.0;
  DecayKernel kernel = DecayKernel::exponential(1.0);
  std::size_t horizon = 1;
  std::optional<std::vector<Count>> periods;

  /// Throws DomainError on alpha/beta <= 0, horizon 0, or periods not summing to horizon.
  void validate() const;
};

/// Power and custom kernels are cut at the first lag with d_L < kTruncationRel.
inline constexpr double kTruncationRel = 1e-6;

/// X(1..T) for one path. `first_draw` forces X(1) while still consuming U_1,
/// so paired calls with the same seed share all later uniforms.
std::vector<std::uint8_t> simulate_path(const UrnConfig& config, std::uint64_t seed,
                                        std::optional<int> first_draw = std::nullopt);

/// Per-period default counts of the multi-period urn (config.periods required).
std::vector<Count> simulate_counts(const UrnConfig& config, std::uint64_t seed);

/// Convenience: simulate_counts wrapped as a history with labels 1..P.
DefaultHistory simulate_history(const UrnConfig& config, std::uint64_t seed);

struct VarianceTrace {
  std::vector<std::size_t> checkpoints;
  std::vector<double> mean_z;
  std::vector<double> var_z; ///< unbiased sample variance
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// 32 log-spaced integer checkpoints in [100, horizon] (fewer when they collide).
std::vector<std::size_t> default_checkpoints(std::size_t horizon, std::size_t count = 32);

/// Z(t) = (1/t) sum_{s<=t} X(s) for every sample (row) and checkpoint (column),
/// row-major. Sample i is driven by derive_seed(base_seed, i).
std::vector<double> sample_z(const UrnConfig& config, std::size_t n_samples,
                             std::span<const std::size_t> checkpoints, std::uint64_t base_seed);

VarianceTrace variance_trace(const UrnConfig& config, std::size_t n_samples,
                             std::vector<std::size_t> checkpoints, std::uint64_t base_seed);

/// Closed-form variance approximation of the total default count:
///   sum pq n_i + sum pq n_i (n_i - 1) rho + 2 pq rho sum_{i>j} n_i n_j d_{i-j}.
/// Exact when every d_i (i >= 1) is 0 or 1, or when rho_d = 0; otherwise it
/// underestimates.
double approx_total_variance(std::span<const Count> n, double theta, double rho_d,
                             const DecayKernel& kernel);

} // namespace pdphase
