#include "pdphase/kernel.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdphase/error.hpp"

namespace pdphase {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(std::string_view text, std::string_view context) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw DomainError("kernel spec '" + std::string(context) + "': '" + std::string(text) +
                      "' is not a number");
  return value;
}

// Sum of (1+i)^-gamma for i >= n via Euler-Maclaurin on f(x) = x^-gamma from n+1.
double power_tail(double gamma, std::size_t n) {
  const double a = static_cast<double>(n) + 1.0;
  const double fa = std::pow(a, -gamma);
  return a * fa / (gamma - 1.0) + fa / 2.0 + gamma * fa / a / 12.0 -
         gamma * (gamma + 1.0) * (gamma + 2.0) * fa / (a * a * a) / 720.0;
}

std::string format_param(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace

DecayKernel DecayKernel::exponential(double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw DomainError("exponential kernel: decay rate r must satisfy 0 < r <= 1 (got " +
                      format_param(r) + ")");
  return {KernelFamily::Exponential, r};
}

DecayKernel DecayKernel::power(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw DomainError("power kernel: exponent gamma must be > 0 (got " + format_param(gamma) + ")");
  return {KernelFamily::Power, gamma};
}

DecayKernel DecayKernel::custom(std::vector<double> d) {
  if (d.empty() || d.front() != 1.0)
    throw DomainError("custom kernel: first element d_0 must equal 1");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 0.0 && d[i] <= 1.0))
      throw DomainError("custom kernel: d_" + std::to_string(i) + " outside [0, 1]");
    if (i > 0 && d[i] > d[i - 1])
      throw DomainError("custom kernel: sequence must be non-increasing (d_" + std::to_string(i) +
                        " > d_" + std::to_string(i - 1) + ")");
  }
  return {KernelFamily::Custom, std::numeric_limits<double>::quiet_NaN(), std::move(d)};
}

DecayKernel DecayKernel::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw DomainError("kernel spec '" + std::string(spec) +
                      "': expected exp:<r>, pow:<gamma> or custom:<d0,d1,...>");
  const auto head = spec.substr(0, colon);
  const auto body = spec.substr(colon + 1);
  if (head == "exp") return exponential(parse_number(body, spec));
  if (head == "pow") return power(parse_number(body, spec));
  if (head == "custom") {
    std::vector<double> d;
    std::size_t start = 0;
    while (start <= body.size()) {
      const auto comma = body.find(',', start);
      const auto end = comma == std::string_view::npos ? body.size() : comma;
      d.push_back(parse_number(body.substr(start, end - start), spec));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return custom(std::move(d));
  }
  throw DomainError("kernel spec '" + std::string(spec) + "': unknown family '" +
                    std::string(head) + "'");
}

double DecayKernel::eval(std::size_t i) const noexcept {
  switch (family_) {
  case KernelFamily::Exponential:
    return i == 0 ? 1.0 : std::pow(param_, static_cast<double>(i));
  case KernelFamily::Power:
    return i == 0 ? 1.0 : std::pow(1.0 + static_cast<double>(i), -param_);
  case KernelFamily::Custom:
    return i < custom_.size() ? custom_[i] : 0.0;
  }
  return 0.0;
}

double DecayKernel::partial_sum(std::size_t t) const {
  switch (family_) {
  case KernelFamily::Exponential: {
    if (param_ == 1.0) return static_cast<double>(t);
    // (1 - r^t) / (1 - r) without cancellation for r near 1
    return -std::expm1(static_cast<double>(t) * std::log(param_)) / (1.0 - param_);
  }
  case KernelFamily::Power: {
    // Neumaier-compensated; terms are decreasing
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      const double term = std::pow(1.0 + static_cast<double>(i), -param_);
      const double s = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
      sum = s;
    }
    return sum + comp;
  }
  case KernelFamily::Custom: {
    double sum = 0.0;
    for (std::size_t i = 0; i < t && i < custom_.size(); ++i) sum += custom_[i];
    return sum;
  }
  }
  return 0.0;
}

std::vector<double> DecayKernel::coefficients(std::size_t n) const {
  std::vector<double> d(n);
  if (family_ == KernelFamily::Exponential) {
    double v = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = v;
      v *= param_;
    }
    return d;
  }
  for (std::size_t i = 0; i < n; ++i) d[i] = eval(i);
  return d;
}

std::size_t DecayKernel::truncation_lag(double rel, std::size_t cap) const {
  switch (family_) {
  case KernelFamily::Exponential: {
    if (param_ == 1.0) return cap;
    const double lag = std::ceil(std::log(rel) / std::log(param_));
    return lag >= static_cast<double>(cap) ? cap : static_cast<std::size_t>(lag);
  }
  case KernelFamily::Power: {
    // (1 + L)^-gamma < rel  <=>  L > rel^(-1/gamma) - 1
    const double lag = std::floor(std::pow(rel, -1.0 / param_)); // smallest integer L beyond
    return lag >= static_cast<double>(cap) ? cap : static_cast<std::size_t>(lag);
  }
  case KernelFamily::Custom:
    return std::min(custom_.size(), cap);
  }
  return cap;
}

ConvergenceClass DecayKernel::classify() const {
  switch (family_) {
  case KernelFamily::Exponential:
    if (param_ >= 1.0) return {kInf, Phase::NonConvergent};
    return {1.0 / (1.0 - param_), Phase::Convergent};
  case KernelFamily::Power: {
    if (param_ <= 1.0) return {kInf, Phase::NonConvergent};
    constexpr std::size_t head = 10000;
    double sum = 0.0;
    // smallest terms first
    for (std::size_t i = head; i-- > 0;) sum += std::pow(1.0 + static_cast<double>(i), -param_);
    return {sum + power_tail(param_, head), Phase::Convergent};
  }
  case KernelFamily::Custom:
    return {partial_sum(custom_.size()), Phase::Convergent};
  }
  return {kInf, Phase::NonConvergent};
}

std::string DecayKernel::to_string() const {
  switch (family_) {
  case KernelFamily::Exponential:
    return "exp:" + format_param(param_);
  case KernelFamily::Power:
    return "pow:" + format_param(param_);
  case KernelFamily::Custom: {
    std::string out = "custom:";
    for (std::size_t i = 0; i < custom_.size(); ++i) {
      if (i) out += ',';
      out += format_param(custom_[i]);
    }
    return out;
  }
  }
  return {};
}

double r_eff(double alpha, double beta, double r) {
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("r_eff: alpha and beta must be positive");
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("r_eff: r must lie in [0, 1)");
  return r + (1.0 - r) / ((alpha + beta) * (1.0 - r) + 1.0);
}

const char* to_string(KernelFamily f) noexcept {
  switch (f) {
  case KernelFamily::Exponential:
    return "exp";
  case KernelFamily::Power:
    return "pow";
  case KernelFamily::Custom:
    return "custom";
  }
  return "?";
}

const char* to_string(Phase p) noexcept {
  return p == Phase::Convergent ? "Convergent" : "NonConvergent";
}

} // namespace pdphase
