#include "pdphase/bayes.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <charconv>
#include <cmath>
#include <limits>

#include "pdphase/error.hpp"
#include "pdphase/optimize.hpp"
#include "pdphase/parallel.hpp"

namespace pdphase {

namespace {

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double u) { return 1.0 / (1.0 + std::exp(-u)); }

/// History-dependent pieces of the posterior for one kernel: the adjustment
/// sums are independent of (theta, rho_d), so they are computed once.
class PosteriorTerms {
public:
  PosteriorTerms(const DefaultHistory& history, const DecayKernel& kernel) : history_(history) {
    const std::size_t p = history.size();
    const auto d = kernel.coefficients(p);
    adj_k_.assign(p, 0.0);
    adj_nk_.assign(p, 0.0);
    for (std::size_t j = 1; j < p; ++j) {
      double sk = 0.0, snk = 0.0;
      for (std::size_t l = 0; l < j; ++l) {
        const double w = d[j - l];
        sk += w * static_cast<double>(history[l].k);
        snk += w * static_cast<double>(history[l].n - history[l].k);
      }
      adj_k_[j] = sk;
      adj_nk_[j] = snk;
    }
    for (const auto& period : history.periods()) log_choose_sum_ += log_choose(period.n, period.k);
  }

  double alpha_adjust(std::size_t j) const { return adj_k_[j]; }
  double beta_adjust(std::size_t j) const { return adj_nk_[j]; }

  double log_likelihood(double alpha, double beta) const {
    double sum = log_choose_sum_;
    for (std::size_t j = 0; j < history_.size(); ++j) {
      const auto& period = history_[j];
      sum += log_beta_ratio(period.k, period.n, alpha + adj_k_[j], beta + adj_nk_[j]);
    }
    return sum;
  }

  /// d/dtheta at fixed z = alpha + beta: alpha_j moves by +z, beta_j by -z and
  /// alpha_j + beta_j is unchanged.
  double dtheta(double alpha, double beta, double z) const {
    using boost::math::digamma;
    double sum = 0.0;
    for (std::size_t j = 0; j < history_.size(); ++j) {
      const auto& period = history_[j];
      const double a = alpha + adj_k_[j];
      const double b = beta + adj_nk_[j];
      const auto k = static_cast<double>(period.k);
      const auto nk = static_cast<double>(period.n - period.k);
      sum += digamma(a + k) - digamma(a) - digamma(b + nk) + digamma(b);
    }
    return z * sum;
  }

private:
  const DefaultHistory& history_;
  std::vector<double> adj_k_;
  std::vector<double> adj_nk_;
  double log_choose_sum_ = 0.0;
};

struct Coordinate {
  double lo, hi;           // natural units
  double (*to_u)(double);  // natural -> search coordinate
  double (*from_u)(double);
};

double identity(double x) { return x; }
double log_fn(double x) { return std::log(x); }
double exp_fn(double u) { return std::exp(u); }

} // namespace

DefaultHistory::DefaultHistory(std::vector<Period> periods, PeriodUnit unit)
    : periods_(std::move(periods)), unit_(unit) {
  for (std::size_t i = 0; i < periods_.size(); ++i) {
    const auto& p = periods_[i];
    const std::string where = "period " + std::to_string(i + 1) + " ('" + p.label + "')";
    if (p.n < 1) throw ValidationError(where + ": n must be >= 1", i + 1);
    if (p.k < 0 || p.k > p.n)
      throw ValidationError(where + ": k = " + std::to_string(p.k) + " outside [0, n = " +
                                std::to_string(p.n) + "]",
                            i + 1);
    if (i > 0 && !label_less(periods_[i - 1].label, p.label))
      throw ValidationError(where + ": labels must be strictly increasing", i + 1);
  }
}

DefaultHistory DefaultHistory::from_counts(const std::vector<std::pair<Count, Count>>& nk) {
  std::vector<Period> periods;
  periods.reserve(nk.size());
  for (std::size_t i = 0; i < nk.size(); ++i)
    periods.push_back({std::to_string(i + 1), nk[i].first, nk[i].second});
  return DefaultHistory(std::move(periods));
}

bool label_less(const std::string& a, const std::string& b) {
  const auto na = as_number(a);
  const auto nb = as_number(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

AdjustedParams adjusted_params(const DefaultHistory& history, const DecayKernel& kernel,
                               const ModelParams& params, std::size_t j) {
  if (j < 1 || j > history.size())
    throw DomainError("adjusted_params: period index out of range");
  double a = params.alpha, b = params.beta;
  for (std::size_t l = 1; l < j; ++l) {
    const double w = kernel(j - l);
    const auto& p = history[l - 1];
    a += w * static_cast<double>(p.k);
    b += w * static_cast<double>(p.n - p.k);
  }
  return {j, a, b};
}

double PriorSpec::log_density(double x) const {
  const auto& t = kernel_log_density;
  if (t.empty()) return 0.0;
  if (x <= t.front().first) return t.front().second;
  if (x >= t.back().first) return t.back().second;
  const auto it = std::lower_bound(t.begin(), t.end(), x,
                                   [](const auto& e, double v) { return e.first < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (x - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

double log_posterior(const DefaultHistory& history, const DecayKernel& kernel,
                     const ModelParams& params, const PriorSpec& prior) {
  if (!(params.theta > 0.0 && params.theta < 1.0 && params.rho_d > 0.0 && params.rho_d < 1.0))
    throw DomainError("log_posterior: parameters on the boundary");
  const PosteriorTerms terms(history, kernel);
  return terms.log_likelihood(params.alpha, params.beta) + prior.log_density(kernel.parameter());
}

double log_posterior_dtheta(const DefaultHistory& history, const DecayKernel& kernel,
                            const ModelParams& params) {
  const PosteriorTerms terms(history, kernel);
  return terms.dtheta(params.alpha, params.beta, params.z);
}

std::vector<double> logit_grid(double lo, double hi, std::size_t nodes) {
  std::vector<double> g(nodes);
  const double a = logit(lo), b = logit(hi);
  for (std::size_t i = 0; i < nodes; ++i)
    g[i] = nodes == 1 ? lo : expit(a + (b - a) * static_cast<double>(i) / double(nodes - 1));
  if (nodes > 1) {
    g.front() = lo;
    g.back() = hi;
  }
  return g;
}

std::vector<double> log_grid(double lo, double hi, std::size_t nodes) {
  std::vector<double> g(nodes);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < nodes; ++i)
    g[i] = nodes == 1 ? lo : std::exp(a + (b - a) * static_cast<double>(i) / double(nodes - 1));
  if (nodes > 1) {
    g.front() = lo;
    g.back() = hi;
  }
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t nodes) {
  std::vector<double> g(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    g[i] = nodes == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / double(nodes - 1);
  return g;
}

MapResult map_estimate(const DefaultHistory& history, KernelFamily family,
                       const SearchConfig& search) {
  if (history.size() == 0) throw ValidationError("map_estimate: empty history");
  if (family == KernelFamily::Custom)
    throw DomainError("map_estimate: kernel family must be exp or pow");

  const bool any_default = std::any_of(history.periods().begin(), history.periods().end(),
                                       [](const Period& p) { return p.k > 0; });
  const bool any_survivor = std::any_of(history.periods().begin(), history.periods().end(),
                                        [](const Period& p) { return p.k < p.n; });
  if (!any_default || !any_survivor)
    throw FlatPosterior(any_default ? "every obligor defaulted in every period; theta has no "
                                      "interior maximum"
                                    : "no defaults observed; theta has no interior maximum");

  const bool exp_family = family == KernelFamily::Exponential;
  const bool estimate_kernel = history.size() >= 2;
  const auto make_kernel = [exp_family](double p) {
    return exp_family ? DecayKernel::exponential(p) : DecayKernel::power(p);
  };

  PosteriorGrid grid;
  grid.theta = logit_grid(search.theta_min, search.theta_max, search.theta_nodes);
  grid.rho_d = search.fixed_rho ? std::vector<double>{*search.fixed_rho}
                                : log_grid(search.rho_min, search.rho_max, search.rho_nodes);
  const double k_lo = exp_family ? search.r_min : search.gamma_min;
  const double k_hi = exp_family ? search.r_max : search.gamma_max;
  if (!estimate_kernel)
    grid.kernel_param = {k_lo};
  else
    grid.kernel_param = exp_family ? log_grid(k_lo, k_hi, search.kernel_nodes)
                                   : linear_grid(k_lo, k_hi, search.kernel_nodes);

  const std::size_t nt = grid.theta.size(), nr = grid.rho_d.size(), nk = grid.kernel_param.size();
  grid.log_density.assign(nt * nr * nk, 0.0);

  // Nodes are independent; each kernel node owns a disjoint set of slots.
  parallel_for(nk, [&](std::size_t ik) {
    const double kp = grid.kernel_param[ik];
    const PosteriorTerms terms(history, make_kernel(kp));
    const double log_prior = search.prior.log_density(kp);
    for (std::size_t it = 0; it < nt; ++it) {
      for (std::size_t ir = 0; ir < nr; ++ir) {
        const double z = (1.0 - grid.rho_d[ir]) / grid.rho_d[ir];
        const double a = grid.theta[it] * z;
        const double b = (1.0 - grid.theta[it]) * z;
        grid.log_density[(it * nr + ir) * nk + ik] = terms.log_likelihood(a, b) + log_prior;
      }
    }
  });

  // Lexicographic scan; strict > keeps the smallest (theta, rho, kernel) on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.log_density.size(); ++i)
    if (grid.log_density[i] > grid.log_density[best]) best = i;
  const double grid_max = grid.log_density[best];
  if (!std::isfinite(grid_max)) throw FlatPosterior("posterior grid has no finite maximum");

  const double tie_tol = 1e-12 * std::max(1.0, std::abs(grid_max));
  const auto ties = std::count_if(grid.log_density.begin(), grid.log_density.end(),
                                  [&](double v) { return grid_max - v <= tie_tol; });
  if (grid.log_density.size() > 1 &&
      static_cast<double>(ties) > 0.5 * static_cast<double>(grid.log_density.size()))
    throw FlatPosterior("posterior maximum ties across more than half of the grid");

  const std::size_t it0 = best / (nr * nk);
  const std::size_t ir0 = (best / nk) % nr;
  const std::size_t ik0 = best % nk;

  // Refinement in transformed coordinates: logit(theta), log(rho), log(r) or gamma.
  double x[3] = {grid.theta[it0], grid.rho_d[ir0], grid.kernel_param[ik0]};
  const Coordinate coords[3] = {
      {search.theta_min, search.theta_max, logit, expit},
      {grid.rho_d.front(), grid.rho_d.back(), log_fn, exp_fn},
      exp_family ? Coordinate{k_lo, k_hi, log_fn, exp_fn} : Coordinate{k_lo, k_hi, identity, identity},
  };
  const double steps[3] = {
      nt > 1 ? (logit(search.theta_max) - logit(search.theta_min)) / double(nt - 1) : 0.0,
      nr > 1 ? (std::log(search.rho_max) - std::log(search.rho_min)) / double(nr - 1) : 0.0,
      nk > 1 ? (coords[2].to_u(k_hi) - coords[2].to_u(k_lo)) / double(nk - 1) : 0.0,
  };
  const bool free_coord[3] = {nt > 1, nr > 1, estimate_kernel && nk > 1};

  std::optional<PosteriorTerms> terms;
  terms.emplace(history, make_kernel(x[2]));
  const auto objective = [&](const double* p) {
    const double z = (1.0 - p[1]) / p[1];
    return terms->log_likelihood(p[0] * z, (1.0 - p[0]) * z) + search.prior.log_density(p[2]);
  };
  double value = objective(x);

  for (int cycle = 0; cycle < search.max_refine_cycles; ++cycle) {
    double max_change = 0.0;
    for (int c = 0; c < 3; ++c) {
      if (!free_coord[c]) continue;
      const auto& co = coords[c];
      const double u = co.to_u(x[c]);
      const double u_lo = std::max(co.to_u(co.lo), u - steps[c]);
      const double u_hi = std::min(co.to_u(co.hi), u + steps[c]);
      double trial[3] = {x[0], x[1], x[2]};
      const auto f = [&](double uu) {
        trial[c] = std::clamp(co.from_u(uu), co.lo, co.hi);
        if (c == 2) terms.emplace(history, make_kernel(trial[2]));
        return objective(trial);
      };
      const auto done = [&](double a, double b) {
        return std::abs(co.from_u(b) - co.from_u(a)) < search.tolerance;
      };
      auto opt = golden_section_maximize(f, u_lo, u_hi, done);
      double candidate = std::clamp(co.from_u(opt.x), co.lo, co.hi);
      // Snap to the range edge when the optimum ran into it.
      if (opt.x == co.to_u(co.lo)) candidate = co.lo;
      if (opt.x == co.to_u(co.hi)) candidate = co.hi;
      if (opt.value >= value) {
        max_change = std::max(max_change, std::abs(candidate - x[c]));
        x[c] = candidate;
        value = opt.value;
      }
      if (c == 2) terms.emplace(history, make_kernel(x[2]));
      value = objective(x);
    }
    if (max_change < search.tolerance) break;
  }

  MapResult result;
  result.theta_hat = x[0];
  result.rho_hat = x[1];
  result.kernel_hat = make_kernel(x[2]);
  result.log_posterior_at_map = value;
  result.grid_max_log_posterior = grid_max;
  result.kernel_estimated = estimate_kernel;
  result.at_boundary = (free_coord[0] && (x[0] == search.theta_min || x[0] == search.theta_max)) ||
                       (free_coord[1] && (x[1] == search.rho_min || x[1] == search.rho_max)) ||
                       (free_coord[2] && (x[2] == k_lo || x[2] == k_hi));
  result.convergence = result.kernel_hat.classify();
  if (search.keep_grid) result.grid = std::move(grid);
  return result;
}

std::size_t posterior_peak_count(const DefaultHistory& history, const DecayKernel& kernel,
                                 double rho_d, std::size_t nodes) {
  if (!(rho_d > 0.0 && rho_d < 1.0)) throw DomainError("posterior_peak_count: rho_d in (0, 1)");
  const PosteriorTerms terms(history, kernel);
  const double z = (1.0 - rho_d) / rho_d;
  const auto theta = logit_grid(1e-5, 1.0 - 1e-5, nodes);
  std::vector<double> profile(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    profile[i] = terms.log_likelihood(theta[i] * z, (1.0 - theta[i]) * z);
  std::size_t peaks = 0;
  for (std::size_t i = 1; i + 1 < nodes; ++i)
    if (profile[i] > profile[i - 1] && profile[i] > profile[i + 1]) ++peaks;
  return peaks;
}

} // namespace pdphase
