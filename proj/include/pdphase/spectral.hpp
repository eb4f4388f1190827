#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pdphase/bayes.hpp"

namespace pdphase {

/// Default rates per period, oldest first.
struct RateSeries {
  std::vector<std::string> labels;
  std::vector<double> rates;
  PeriodUnit unit = PeriodUnit::Year;

  std::size_t size() const noexcept { return rates.size(); }
  /// Unlabelled series (labels 1..n); used for synthetic data.
  static RateSeries from_values(std::vector<double> values);
};

enum class Detrend { None, Mean, Linear };

Detrend parse_detrend(const std::string& name);
const char* to_string(Detrend d) noexcept;

std::vector<double> detrend(std::span<const double> x, Detrend mode);

/// Biased sample autocorrelation rho(h), h = 0..max_lag, normalized by the
/// full-sample sum of squares. Throws DegenerateSeries for a constant series
/// and DomainError when max_lag > length / 2.
std::vector<double> autocorrelation(const RateSeries& series, std::size_t max_lag);

struct SpectrumResult {
  std::size_t n = 0;          ///< length of the transformed series
  std::vector<double> freqs;  ///< k / n for k = 1..floor(n/2), cycles per period
  std::vector<double> power;  ///< one-sided; sums to the population variance
  double loglog_slope = 0.0;  ///< b in power ~ f^-b over the central decade
  double slope_stderr = 0.0;
  std::size_t fit_points = 0;
  /// Set for series shorter than 128 periods, where the fit rests on few bins.
  bool short_series = false;
};

struct PeriodogramOptions {
  Detrend detrend = Detrend::Mean;
  /// Hann taper before the transform. Off by default; with it on the power no
  /// longer sums exactly to the variance.
  bool hann_window = false;
};

/// Raw periodogram of the detrended series. Requires length >= 8.
SpectrumResult periodogram(const RateSeries& series, const PeriodogramOptions& options = {});

/// Circular autocovariance c(h) = (1/n) sum_t y_t y_{(t+h) mod n}, h = 0..n-1,
/// of the zero-mean transformed series, recovered by inverse Fourier
/// transform of the periodogram.
std::vector<double> autocovariance_from_spectrum(const SpectrumResult& spectrum);

/// Ordinary least-squares fit of log10(power) on log10(freq) restricted to
/// the central decade of the positive frequencies below Nyquist. Returns
/// (slope b with power ~ f^-b, standard error, number of points).
struct SlopeFit {
  double slope = 0.0;
  double standard_error = 0.0;
  std::size_t points = 0;
};
SlopeFit fit_loglog_slope(std::span<const double> freqs, std::span<const double> power,
                          std::size_t n);

// --- CSV ingestion -------------------------------------------------------

/// History CSV with header `label,n,k` or `label,n,rate` (rates rounded to
/// counts). Throws ParseError / ValidationError with the 1-based file row.
DefaultHistory read_history_csv(std::istream& in);
DefaultHistory ingest_history_csv(const std::string& path);

/// Rate CSV with header `label,rate`, `label,n,rate` or `label,n,k` (rate = k/n).
RateSeries read_rate_csv(std::istream& in);
RateSeries ingest_rate_csv(const std::string& path);

} // namespace pdphase
