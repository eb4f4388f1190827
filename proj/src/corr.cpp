#include "pdphase/corr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdphase/convolution.hpp"
#include "pdphase/error.hpp"
#include "pdphase/optimize.hpp"
#include "pdphase/parallel.hpp"

namespace pdphase {

namespace {

const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

// Values within FFT round-off of [0, 1] are clamped; anything further is a bug.
void check_unit_interval(double& c, std::size_t t, const DecayKernel& kernel) {
  if (c >= 0.0 && c <= 1.0) return;
  if (c >= -1e-12 && c <= 1.0 + 1e-12) {
    c = std::clamp(c, 0.0, 1.0);
    return;
  }
  std::ostringstream os;
  os.precision(17);
  os << "correlation recursion left [0, 1]: C(" << t << ") = " << c << " for kernel "
     << kernel.to_string();
  throw InvariantViolation(os.str());
}

void fill_moments(CorrTrace& trace) {
  const std::size_t n = trace.c.size();
  trace.m0.assign(n, 0.0);
  trace.m1.assign(n, 0.0);
  trace.m2.assign(n, 0.0);
  trace.tau.assign(n, 0.0);
  trace.xi.assign(n, 0.0);
  long double s0 = 0.0L, s1 = 0.0L, s2 = 0.0L;
  for (std::size_t t = 1; t < n; ++t) {
    const long double c = trace.c[t - 1];
    const auto s = static_cast<long double>(t - 1);
    s0 += c;
    s1 += c * s;
    s2 += c * s * s;
    trace.m0[t] = static_cast<double>(s0);
    trace.m1[t] = static_cast<double>(s1);
    trace.m2[t] = static_cast<double>(s2);
    trace.tau[t] = trace.m0[t];
    trace.xi[t] = static_cast<double>(std::sqrt(s2 / s0));
  }
  for (std::size_t t = 1; t < n; ++t) {
    if (trace.c[t] > trace.c[t - 1]) {
      trace.first_increase = t;
      break;
    }
  }
}

double stable_power_integral(double eps, double log_lo, double log_hi) {
  // (e^{eps log_hi} - e^{eps log_lo}) / eps, continuous at eps = 0
  if (eps == 0.0) return log_hi - log_lo;
  return (std::expm1(eps * log_hi) - std::expm1(eps * log_lo)) / eps;
}

} // namespace

CorrTrace corr_recursion(double alpha, double beta, const DecayKernel& kernel, std::size_t horizon,
                         CorrMethod method) {
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("corr_recursion: alpha, beta must be > 0");
  if (horizon < 1) throw DomainError("corr_recursion: horizon must be >= 1");

  const double ab = alpha + beta;
  CorrTrace trace;
  trace.alpha = alpha;
  trace.beta = beta;
  trace.c.assign(horizon + 1, 0.0);
  trace.c[0] = 1.0;

  const bool recurrence = kernel.family() == KernelFamily::Exponential &&
                          method == CorrMethod::Auto;
  if (recurrence) {
    // C(1) = 1 / (ab + 1); for t >= 2
    // C(t) = (1 + r (ab + D(t-1))) / (ab + D(t)) * C(t-1),  D(t) = sum_{i<t} r^i
    const double r = kernel.parameter();
    double d_prev = 1.0; // D(1)
    trace.c[1] = 1.0 / (ab + 1.0);
    check_unit_interval(trace.c[1], 1, kernel);
    for (std::size_t t = 2; t <= horizon; ++t) {
      const double d_t = r * d_prev + 1.0;
      trace.c[t] = (1.0 + r * (ab + d_prev)) / (ab + d_t) * trace.c[t - 1];
      check_unit_interval(trace.c[t], t, kernel);
      d_prev = d_t;
    }
  } else {
    std::size_t lags = horizon;
    if (kernel.family() == KernelFamily::Custom) lags = std::min(horizon, kernel.support().size());
    const auto d = kernel.coefficients(lags);
    std::vector<double> prefix(horizon + 1, 0.0);
    long double acc = 0.0L;
    for (std::size_t t = 1; t <= horizon; ++t) {
      if (t - 1 < lags) acc += d[t - 1];
      prefix[t] = static_cast<double>(acc);
    }

    const bool direct = method == CorrMethod::Direct ||
                        (method == CorrMethod::Auto &&
                         (horizon <= kCorrDirectMax || lags <= OnlineConvolver::kDefaultDirectLags));
    OnlineConvolver conv(d, horizon, direct ? lags : OnlineConvolver::kDefaultDirectLags);
    double numerator = conv.push(trace.c[0]);
    for (std::size_t t = 1; t <= horizon; ++t) {
      trace.c[t] = numerator / (ab + prefix[t]);
      check_unit_interval(trace.c[t], t, kernel);
      if (t < horizon) numerator = conv.push(trace.c[t]);
    }
  }
  fill_moments(trace);
  return trace;
}

double variance_decomposition_term(double alpha, double beta, const CorrTrace& trace,
                                   std::size_t t) {
  if (t < 1 || t > trace.horizon()) throw DomainError("variance_decomposition_term: t out of range");
  const double ab = alpha + beta;
  const double sum = trace.m0[t];
  const double td = static_cast<double>(t);
  return alpha * beta / (ab * ab) * sum * sum / (td * td);
}

double local_decay_exponent(const CorrTrace& trace, std::size_t t) {
  if (t < 1 || 2 * t > trace.horizon())
    throw DomainError("local_decay_exponent: need 1 <= t and 2t <= horizon");
  return std::log2(trace.c[t] / trace.c[2 * t]);
}

double delta_from_tau_ratio(double tau_ratio) {
  if (!(tau_ratio > 1.0 && tau_ratio <= 2.0))
    throw DomainError("delta_from_tau_ratio: tau ratio must lie in (1, 2]");
  return 1.0 - std::log2(tau_ratio);
}

double delta_from_xi_t(double xi_t) {
  if (!(xi_t >= 0.0 && xi_t <= kInvSqrt3 + 1e-12))
    throw DomainError("delta_from_xi_t: xi_t must lie in [0, 1/sqrt(3)]");
  const double x2 = xi_t * xi_t;
  return std::max(0.0, (1.0 - 3.0 * x2) / (1.0 - x2));
}

FssPoint fss_point(double alpha, double beta, double gamma, std::size_t horizon,
                   const FssOptions& options) {
  if (horizon < 8) throw DomainError("fss: horizon must be >= 8");
  const auto trace = corr_recursion(alpha, beta, DecayKernel::power(gamma), horizon);
  const std::size_t t = horizon, half = horizon / 2, quarter = horizon / 4;

  FssPoint p;
  p.gamma = gamma;
  p.xi_over_t = trace.xi[t] / static_cast<double>(t);
  p.xi_ratio = trace.xi[t] / trace.xi[half];
  p.xi_ratio_prev = trace.xi[half] / trace.xi[quarter];
  p.tau_ratio = trace.tau[t] / trace.tau[half];
  p.local_delta = std::log2(trace.c[half] / trace.c[t]);

  const double tol = options.fixed_point_tol;
  if (std::abs(p.xi_ratio - 1.0) < tol) {
    p.fixed_point = FixedPoint::StableZero;
  } else if (std::abs(p.xi_ratio - 2.0) < tol) {
    p.fixed_point = std::abs(p.xi_over_t - kInvSqrt3) < tol ? FixedPoint::StableInvSqrt3
                                                            : FixedPoint::Unstable;
  }

  const double delta = p.local_delta;
  if (p.fixed_point == FixedPoint::StableInvSqrt3 || p.xi_ratio >= 2.0 + tol) {
    p.regime = Regime::Ordered;
  } else if (p.fixed_point == FixedPoint::Unstable || delta < 1.0) {
    p.regime = Regime::Critical;
  } else {
    p.regime = delta < 3.0 ? Regime::Intermediate : Regime::ShortRange;
  }
  p.log_corrected = std::abs(delta - 1.0) < options.boundary_tol ||
                    std::abs(delta - 3.0) < options.boundary_tol;
  return p;
}

FssReport fss_analysis(double alpha, double beta, std::span<const double> gammas,
                       std::size_t horizon, const FssOptions& options) {
  FssReport report;
  report.alpha = alpha;
  report.beta = beta;
  report.horizon = horizon;
  report.points.resize(gammas.size());
  parallel_for(gammas.size(), [&](std::size_t i) {
    report.points[i] = fss_point(alpha, beta, gammas[i], horizon, options);
  });

  for (const auto& p : report.points) {
    const double change = std::abs(p.xi_ratio - p.xi_ratio_prev) / p.xi_ratio_prev;
    if (change > options.horizon_tol) {
      std::ostringstream os;
      os << "gamma = " << p.gamma << ": xi ratio moved by " << change * 100.0
         << "% between the last two doublings; increase the horizon";
      throw InsufficientHorizon(os.str());
    }
  }

  if (options.locate_critical) {
    const auto excess = [&](double g) { return fss_point(alpha, beta, g, horizon, options).xi_ratio - 2.0; };
    const double gc = bisect(excess, options.gamma_lo, options.gamma_hi, options.gamma_tol);
    const auto at_c = fss_point(alpha, beta, gc, horizon, options);
    report.gamma_c = gc;
    report.xi_t_c = at_c.xi_over_t;
    report.tau_ratio_c = at_c.tau_ratio;
    if (at_c.tau_ratio > 1.0 && at_c.tau_ratio <= 2.0)
      report.delta_from_tau = delta_from_tau_ratio(at_c.tau_ratio);
    if (at_c.xi_over_t <= kInvSqrt3) report.delta_from_xi = delta_from_xi_t(at_c.xi_over_t);
  }
  return report;
}

double critical_equation_rhs(double delta, double t_cutoff) {
  const double lo = 1.0 / (t_cutoff + 1.0);
  const double eps = 1.0 - delta;
  constexpr int kTerms = 64; // both series below shrink like 2^-j

  // [lo, 1/2]: (mu^-delta - 1)/(1 - mu) = (mu^-delta - 1) + (mu^{1-delta} - mu)/(1 - mu).
  // The first piece is integrated in closed form, the second by expanding 1/(1 - mu).
  const double closed = stable_power_integral(eps, std::log(lo), std::log(0.5)) - (0.5 - lo);
  long double left = 0.0L;
  for (int j = 0; j < kTerms; ++j) {
    const double p = j + 1.0 + eps, q = j + 2.0;
    left += (std::pow(0.5, p) - std::pow(lo, p)) / p - (std::pow(0.5, q) - std::pow(lo, q)) / q;
  }

  // [1/2, 1 - lo] in w = 1 - mu: ((1 - w)^-delta - 1)/w = sum_{m>=1} (delta)_m / m! w^{m-1}.
  long double right = 0.0L;
  double coef = delta;
  for (int m = 1; m <= kTerms; ++m) {
    right += coef * (std::pow(0.5, m) - std::pow(lo, m)) / m;
    coef *= (delta + m) / (m + 1.0);
  }
  return closed + static_cast<double>(left + right);
}

double delta_critical(double alpha_plus_beta, double t_cutoff) {
  if (!(alpha_plus_beta > 0.0)) throw DomainError("delta_critical: alpha + beta must be > 0");
  if (!(t_cutoff >= 1e6)) throw DomainError("delta_critical: t_cutoff must be >= 1e6");
  const double top = critical_equation_rhs(1.0, t_cutoff);
  if (alpha_plus_beta >= top) {
    std::ostringstream os;
    os << "delta_critical: alpha + beta = " << alpha_plus_beta
       << " is not bracketed; the right-hand side only reaches " << top
       << " at t_cutoff = " << t_cutoff;
    throw NoRoot(os.str());
  }
  return bisect([&](double d) { return critical_equation_rhs(d, t_cutoff) - alpha_plus_beta; }, 0.0,
                1.0, 1e-6);
}

const char* to_string(Regime r) noexcept {
  switch (r) {
  case Regime::Ordered:
    return "ordered";
  case Regime::Critical:
    return "critical";
  case Regime::Intermediate:
    return "intermediate";
  case Regime::ShortRange:
    return "short_range";
  }
  return "?";
}

const char* to_string(FixedPoint f) noexcept {
  switch (f) {
  case FixedPoint::None:
    return "none";
  case FixedPoint::StableZero:
    return "stable_zero";
  case FixedPoint::StableInvSqrt3:
    return "stable_inv_sqrt3";
  case FixedPoint::Unstable:
    return "unstable";
  }
  return "?";
}

} // namespace pdphase
