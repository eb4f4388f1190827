#include "pdphase/urnsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdphase/convolution.hpp"
#include "pdphase/error.hpp"
#include "pdphase/parallel.hpp"
#include "pdphase/rng.hpp"

namespace pdphase {

namespace {

// Kernels at or below this many lags are convolved directly from the history.
constexpr std::size_t kDirectOnlyLags = 256;

/// Reusable per-thread machinery for drawing paths under one config.
class PathEngine {
public:
  explicit PathEngine(const UrnConfig& config) : config_(config) {
    config.validate();
    if (config.periods) {
      decay_ = config.kernel.coefficients(config.periods->size());
      return;
    }
    exponential_ = config.kernel.family() == KernelFamily::Exponential;
    if (exponential_) return;
    const std::size_t lag = std::max<std::size_t>(
        1, config.kernel.truncation_lag(kTruncationRel, config.horizon));
    decay_ = config.kernel.coefficients(lag);
    // The denominator uses the same truncated weights so E[X(t)] stays alpha/(alpha+beta).
    prefix_.assign(lag + 1, 0.0);
    std::partial_sum(decay_.begin(), decay_.end(), prefix_.begin() + 1);
    const std::size_t direct = lag <= kDirectOnlyLags ? lag : OnlineConvolver::kDefaultDirectLags;
    convolver_.emplace(decay_, config.horizon, direct);
  }

  /// Calls on_step(t, x) for t = 1..T with x = X(t).
  template <class OnStep>
  void run(std::uint64_t seed, std::optional<int> first_draw, OnStep&& on_step) {
    CounterRng rng(seed);
    if (config_.periods) {
      run_periods(rng, first_draw, on_step);
      return;
    }
    const double a = config_.alpha;
    const double ab = config_.alpha + config_.beta;
    const double r = config_.kernel.parameter();
    double weighted = 0.0; // sum_{s<=t} X(s) d_{t-s}
    double norm = 0.0;     // sum_{s<=t} d_{t-s}
    if (convolver_) convolver_->reset();
    for (std::size_t t = 0; t < config_.horizon; ++t) {
      const double z = (a + weighted) / (ab + norm);
      const double u = rng.uniform();
      int x = u <= z ? 1 : 0;
      if (t == 0 && first_draw) x = *first_draw;
      if (exponential_) {
        weighted = r * weighted + x;
        norm = r * norm + 1.0;
      } else {
        weighted = convolver_->push(static_cast<double>(x));
        norm = prefix_[std::min(t + 1, prefix_.size() - 1)];
      }
      on_step(t + 1, x);
    }
  }

private:
  template <class OnStep>
  void run_periods(CounterRng& rng, std::optional<int> first_draw, OnStep& on_step) {
    const auto& n = *config_.periods;
    std::vector<Count> k(n.size(), 0);
    std::size_t t = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      double a = config_.alpha, b = config_.beta;
      for (std::size_t l = 0; l < i; ++l) {
        a += decay_[i - l] * static_cast<double>(k[l]);
        b += decay_[i - l] * static_cast<double>(n[l] - k[l]);
      }
      Count hits = 0;
      for (Count m = 0; m < n[i]; ++m) {
        const double z = (a + static_cast<double>(hits)) / (a + b + static_cast<double>(m));
        const double u = rng.uniform();
        int x = u <= z ? 1 : 0;
        if (t == 0 && first_draw) x = *first_draw;
        hits += x;
        on_step(++t, x);
      }
      k[i] = hits;
    }
  }

  const UrnConfig& config_;
  bool exponential_ = false;
  std::vector<double> decay_;
  std::vector<double> prefix_;
  std::optional<OnlineConvolver> convolver_;
};

} // namespace

void UrnConfig::validate() const {
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("urn: alpha and beta must be positive");
  if (horizon < 1) throw DomainError("urn: horizon must be >= 1");
  if (periods) {
    Count total = 0;
    for (const Count n : *periods) {
      if (n < 1) throw DomainError("urn: every period needs n >= 1");
      total += n;
    }
    if (static_cast<std::size_t>(total) != horizon)
      throw DomainError("urn: period sizes must sum to the horizon");
  }
}

std::vector<std::uint8_t> simulate_path(const UrnConfig& config, std::uint64_t seed,
                                        std::optional<int> first_draw) {
  PathEngine engine(config);
  std::vector<std::uint8_t> path(config.horizon);
  engine.run(seed, first_draw,
             [&](std::size_t t, int x) { path[t - 1] = static_cast<std::uint8_t>(x); });
  return path;
}

std::vector<Count> simulate_counts(const UrnConfig& config, std::uint64_t seed) {
  if (!config.periods) throw DomainError("simulate_counts: config has no periods");
  const auto path = simulate_path(config, seed);
  std::vector<Count> k;
  k.reserve(config.periods->size());
  std::size_t t = 0;
  for (const Count n : *config.periods) {
    Count hits = 0;
    for (Count m = 0; m < n; ++m) hits += path[t++];
    k.push_back(hits);
  }
  return k;
}

DefaultHistory simulate_history(const UrnConfig& config, std::uint64_t seed) {
  const auto k = simulate_counts(config, seed);
  std::vector<std::pair<Count, Count>> nk;
  for (std::size_t i = 0; i < k.size(); ++i) nk.emplace_back((*config.periods)[i], k[i]);
  return DefaultHistory::from_counts(nk);
}

std::vector<std::size_t> default_checkpoints(std::size_t horizon, std::size_t count) {
  const double lo = horizon >= 100 ? 100.0 : 1.0;
  const double hi = static_cast<double>(horizon);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 1.0 : static_cast<double>(i) / double(count - 1);
    const auto t = static_cast<std::size_t>(std::llround(lo * std::pow(hi / lo, f)));
    if (out.empty() || t > out.back()) out.push_back(std::min(t, horizon));
  }
  return out;
}

std::vector<double> sample_z(const UrnConfig& config, std::size_t n_samples,
                             std::span<const std::size_t> checkpoints, std::uint64_t base_seed) {
  config.validate();
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > config.horizon)
      throw DomainError("checkpoints must lie in [1, horizon]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw DomainError("checkpoints must be strictly increasing");
  }
  const std::size_t nc = checkpoints.size();
  std::vector<double> z(n_samples * nc, 0.0);

  // Contiguous chunks so each worker builds its engine (and FFT plans) once.
  const std::size_t chunks = std::min(n_samples, worker_count() * 4);
  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t begin = n_samples * chunk / chunks;
    const std::size_t end = n_samples * (chunk + 1) / chunks;
    PathEngine engine(config);
    for (std::size_t i = begin; i < end; ++i) {
      double* row = z.data() + i * nc;
      std::size_t next = 0;
      Count hits = 0;
      engine.run(derive_seed(base_seed, i), std::nullopt, [&](std::size_t t, int x) {
        hits += x;
        if (next < nc && t == checkpoints[next])
          row[next++] = static_cast<double>(hits) / static_cast<double>(t);
      });
    }
  });
  return z;
}

VarianceTrace variance_trace(const UrnConfig& config, std::size_t n_samples,
                             std::vector<std::size_t> checkpoints, std::uint64_t base_seed) {
  if (n_samples < 2) throw DomainError("variance_trace: need at least 2 samples");
  if (checkpoints.empty()) checkpoints = default_checkpoints(config.horizon);
  const auto z = sample_z(config, n_samples, checkpoints, base_seed);
  const std::size_t nc = checkpoints.size();

  VarianceTrace trace;
  trace.checkpoints = std::move(checkpoints);
  trace.mean_z.assign(nc, 0.0);
  trace.var_z.assign(nc, 0.0);
  trace.n_samples = n_samples;
  trace.seed = base_seed;
  // Two passes in sample order: the result does not depend on thread scheduling.
  for (std::size_t i = 0; i < n_samples; ++i)
    for (std::size_t c = 0; c < nc; ++c) trace.mean_z[c] += z[i * nc + c];
  for (auto& m : trace.mean_z) m /= static_cast<double>(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    for (std::size_t c = 0; c < nc; ++c) {
      const double dev = z[i * nc + c] - trace.mean_z[c];
      trace.var_z[c] += dev * dev;
    }
  for (auto& v : trace.var_z) v /= static_cast<double>(n_samples - 1);
  return trace;
}

double approx_total_variance(std::span<const Count> n, double theta, double rho_d,
                             const DecayKernel& kernel) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("approx_total_variance: theta in [0, 1]");
  if (!(rho_d >= 0.0 && rho_d <= 1.0)) throw DomainError("approx_total_variance: rho_d in [0, 1]");
  const double pq = theta * (1.0 - theta);
  const auto d = kernel.coefficients(n.size());
  double binomial = 0.0, within = 0.0, across = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto ni = static_cast<double>(n[i]);
    binomial += ni;
    within += ni * (ni - 1.0);
    for (std::size_t j = 0; j < i; ++j) across += ni * static_cast<double>(n[j]) * d[i - j];
  }
  return pq * binomial + pq * rho_d * within + 2.0 * pq * rho_d * across;
}

} // namespace pdphase
