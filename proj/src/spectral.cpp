#include "pdphase/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pdphase/error.hpp"
#include "pdphase/fft.hpp"

namespace pdphase {

RateSeries RateSeries::from_values(std::vector<double> values) {
  RateSeries s;
  s.labels.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.labels.push_back(std::to_string(i + 1));
  s.rates = std::move(values);
  return s;
}

Detrend parse_detrend(const std::string& name) {
  if (name == "none") return Detrend::None;
  if (name == "mean") return Detrend::Mean;
  if (name == "linear") return Detrend::Linear;
  throw DomainError("detrend must be one of none, mean, linear (got '" + name + "')");
}

const char* to_string(Detrend d) noexcept {
  switch (d) {
  case Detrend::None:
    return "none";
  case Detrend::Mean:
    return "mean";
  case Detrend::Linear:
    return "linear";
  }
  return "?";
}

std::vector<double> detrend(std::span<const double> x, Detrend mode) {
  std::vector<double> y(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  if (mode == Detrend::None || x.empty()) return y;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (mode == Detrend::Mean || x.size() < 2) {
    for (auto& v : y) v -= mean;
    return y;
  }
  // least-squares line against t = 0..n-1
  const double t_mean = (n - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxy += dt * (x[t] - mean);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;
  for (std::size_t t = 0; t < x.size(); ++t)
    y[t] = x[t] - mean - slope * (static_cast<double>(t) - t_mean);
  return y;
}

namespace {

// Sum of squares indistinguishable from rounding noise of the raw values.
bool negligible_spread(double ss, const std::vector<double>& raw) {
  double scale = 0.0;
  for (const double v : raw) scale = std::max(scale, std::abs(v));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  return !(ss > static_cast<double>(raw.size()) * noise * noise);
}

} // namespace

std::vector<double> autocorrelation(const RateSeries& series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw DomainError("autocorrelation: need at least 2 points");
  if (max_lag > n / 2) throw DomainError("autocorrelation: max_lag must be <= length / 2");
  const auto y = detrend(series.rates, Detrend::Mean);
  double ss = 0.0;
  for (const double v : y) ss += v * v;
  if (negligible_spread(ss, series.rates)) throw DegenerateSeries("autocorrelation: series has zero variance");
  std::vector<double> rho(max_lag + 1);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double s = 0.0;
    for (std::size_t t = 0; t + h < n; ++t) s += y[t] * y[t + h];
    rho[h] = s / ss;
  }
  return rho;
}

SlopeFit fit_loglog_slope(std::span<const double> freqs, std::span<const double> power,
                          std::size_t n) {
  // Positive frequencies strictly below Nyquist.
  const std::size_t usable = (n - 1) / 2;
  SlopeFit fit;
  if (usable < 2) return fit;
  const double f_lo = freqs[0];
  const double f_hi = freqs[usable - 1];
  const double centre = std::sqrt(f_lo * f_hi);
  const double half_decade = std::sqrt(10.0);
  const double lo = centre / half_decade, hi = centre * half_decade;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < usable; ++i) {
    if (freqs[i] < lo || freqs[i] > hi || !(power[i] > 0.0)) continue;
    lx.push_back(std::log10(freqs[i]));
    ly.push_back(std::log10(power[i]));
  }
  fit.points = lx.size();
  if (lx.size() < 3) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.standard_error = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const auto m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double b = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - my - b * (lx[i] - mx);
    rss += r * r;
  }
  fit.slope = -b;
  fit.standard_error = std::sqrt(rss / (m - 2.0) / sxx);
  return fit;
}

SpectrumResult periodogram(const RateSeries& series, const PeriodogramOptions& options) {
  const std::size_t n = series.size();
  if (n < 8) throw DomainError("periodogram: need at least 8 points");
  for (const double v : series.rates)
    if (!std::isfinite(v)) throw DomainError("periodogram: series contains non-finite values");

  auto y = detrend(series.rates, options.detrend);
  if (options.hann_window) {
    for (std::size_t t = 0; t < n; ++t)
      y[t] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(t) / double(n));
  }
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double ss = 0.0;
  for (const double v : y) ss += (v - mean) * (v - mean);
  if (negligible_spread(ss, series.rates)) throw DegenerateSeries("periodogram: series has zero variance");

  const auto spectrum = rfft(y);
  SpectrumResult out;
  out.n = n;
  const std::size_t kmax = n / 2;
  const double norm = 1.0 / (double(n) * double(n));
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double p = std::norm(spectrum[k]) * norm;
    const bool nyquist = (n % 2 == 0) && k == kmax;
    out.freqs.push_back(double(k) / double(n));
    out.power.push_back(nyquist ? p : 2.0 * p);
  }
  const auto fit = fit_loglog_slope(out.freqs, out.power, n);
  out.loglog_slope = fit.slope;
  out.slope_stderr = fit.standard_error;
  out.fit_points = fit.points;
  out.short_series = n < 128;
  return out;
}

std::vector<double> autocovariance_from_spectrum(const SpectrumResult& spectrum) {
  const std::size_t n = spectrum.n;
  RealFft fft(n);
  std::vector<std::complex<double>> two_sided(fft.spectrum_size(), 0.0);
  for (std::size_t i = 0; i < spectrum.power.size(); ++i) {
    const std::size_t k = i + 1;
    const bool nyquist = (n % 2 == 0) && k == n / 2;
    two_sided[k] = nyquist ? spectrum.power[i] : spectrum.power[i] / 2.0;
  }
  std::vector<double> c(n);
  fft.inverse(two_sided, c);
  return c;
}

} // namespace pdphase
