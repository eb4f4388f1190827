#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdphase/betabinom.hpp"
#include "pdphase/kernel.hpp"

namespace pdphase {

enum class PeriodUnit { Year, Month };

struct Period {
  std::string label;
  Count n = 0; ///< obligors
  Count k = 0; ///< defaults
};

/// Observed (n_i, k_i) per period, oldest first.
class DefaultHistory {
public:
  DefaultHistory() = default;
  /// Validates 0 <= k <= n, n >= 1 and strictly increasing labels; throws
  /// ValidationError naming the offending period (1-based).
  DefaultHistory(std::vector<Period> periods, PeriodUnit unit = PeriodUnit::Year);

  /// Unlabelled history; labels become "1", "2", ...
  static DefaultHistory from_counts(const std::vector<std::pair<Count, Count>>& nk);

  const std::vector<Period>& periods() const noexcept { return periods_; }
  PeriodUnit unit() const noexcept { return unit_; }
  std::size_t size() const noexcept { return periods_.size(); }
  const Period& operator[](std::size_t i) const { return periods_[i]; }

private:
  std::vector<Period> periods_;
  PeriodUnit unit_ = PeriodUnit::Year;
};

/// Label ordering: numeric when both labels parse as numbers, lexicographic otherwise.
bool label_less(const std::string& a, const std::string& b);

/// Temporally adjusted beta-binomial parameters for period j (1-based):
///   alpha_j = alpha + sum_{l<j} d_{j-l} k_l
///   beta_j  = beta  + sum_{l<j} d_{j-l} (n_l - k_l)
struct AdjustedParams {
  std::size_t j = 0;
  double alpha_j = 0.0;
  double beta_j = 0.0;
};

AdjustedParams adjusted_params(const DefaultHistory& history, const DecayKernel& kernel,
                               const ModelParams& params, std::size_t j);

/// Prior over (theta, rho_d, kernel parameter). Uniform in theta and rho_d.
/// The kernel parameter is uniform on its search range unless a log-density
/// table (parameter, log p) is supplied; it is interpolated linearly and
/// clamped at the table ends.
struct PriorSpec {
  std::vector<std::pair<double, double>> kernel_log_density;

  double log_density(double kernel_param) const;
};

/// Sum over periods of log_pmf(k_j, n_j, alpha_j, beta_j) plus the log prior.
/// The evidence is never computed, so this is defined up to a constant.
double log_posterior(const DefaultHistory& history, const DecayKernel& kernel,
                     const ModelParams& params, const PriorSpec& prior = {});

/// d/d theta of log_posterior at fixed rho_d (digamma form).
double log_posterior_dtheta(const DefaultHistory& history, const DecayKernel& kernel,
                            const ModelParams& params);

struct SearchConfig {
  std::size_t theta_nodes = 200;
  double theta_min = 1e-5;
  double theta_max = 1.0 - 1e-5;

  std::size_t rho_nodes = 200;
  double rho_min = 1e-6;
  double rho_max = 0.5;

  std::size_t kernel_nodes = 100;
  double r_min = 1e-4;
  double r_max = 0.999;
  double gamma_min = 0.1;
  double gamma_max = 12.0;

  std::optional<double> fixed_rho;
  /// Absolute tolerance per coordinate for the golden-section refinement.
  double tolerance = 1e-5;
  int max_refine_cycles = 100;
  bool keep_grid = false;
  PriorSpec prior;
};

struct PosteriorGrid {
  std::vector<double> theta;
  std::vector<double> rho_d;
  std::vector<double> kernel_param;
  /// Row-major [theta][rho_d][kernel_param].
  std::vector<double> log_density;

  double at(std::size_t i_theta, std::size_t i_rho, std::size_t i_kernel) const {
    return log_density[(i_theta * rho_d.size() + i_rho) * kernel_param.size() + i_kernel];
  }
};

struct MapResult {
  double theta_hat = 0.0;
  double rho_hat = 0.0;
  DecayKernel kernel_hat = DecayKernel::exponential(1.0);
  double log_posterior_at_map = 0.0;
  /// Some coordinate of the maximizer sits on the edge of its search range.
  bool at_boundary = false;
  /// False for single-period histories, where the kernel cannot matter.
  bool kernel_estimated = true;
  /// Best node of the coarse grid before refinement.
  double grid_max_log_posterior = 0.0;
  std::optional<PosteriorGrid> grid;
  ConvergenceClass convergence;
};

/// Grid search over (theta, rho_d, kernel parameter) followed by coordinate-wise
/// golden-section refinement. Throws FlatPosterior for degenerate data.
MapResult map_estimate(const DefaultHistory& history, KernelFamily family,
                       const SearchConfig& search = {});

/// Number of strict interior local maxima of the theta profile of the
/// log-posterior at fixed rho_d, scanned on `nodes` logit-spaced points.
std::size_t posterior_peak_count(const DefaultHistory& history, const DecayKernel& kernel,
                                 double rho_d, std::size_t nodes = 10000);

/// Logit-spaced grid over [lo, hi] (both inside (0, 1)).
std::vector<double> logit_grid(double lo, double hi, std::size_t nodes);
/// Log-spaced grid over [lo, hi] (both positive).
std::vector<double> log_grid(double lo, double hi, std::size_t nodes);
std::vector<double> linear_grid(double lo, double hi, std::size_t nodes);

} // namespace pdphase
