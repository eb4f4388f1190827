#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pdphase/fft.hpp"

namespace pdphase {

/// Causal convolution of a sequence that arrives one element at a time with a
/// kernel known in advance:
///
///   y_m = sum_{j=0}^{m} x_j * kernel_{m-j}
///
/// y_m is available as soon as x_m is pushed, which is what feedback
/// recursions (urn weights, correlation recursion) need.
///
/// Lags below `direct_lags` are summed directly. Larger lags are split into
/// levels L = direct_lags * 2^i covering lags [L, 2L); whenever an aligned
/// block of L inputs completes, its product with kernel[L, 2L) is done by FFT
/// and scattered into a pending-output buffer. Every (input, lag) pair is
/// covered exactly once and always before its output index is reached, so the
/// total cost is O(T log^2 T) instead of O(T^2).
class OnlineConvolver {
public:
  static constexpr std::size_t kDefaultDirectLags = 64;

  /// `horizon` is the number of inputs that will be pushed. Kernel entries at
  /// lags >= horizon can never contribute and are dropped. With
  /// `direct_lags` >= the effective kernel length everything is done directly.
  OnlineConvolver(std::span<const double> kernel, std::size_t horizon,
                  std::size_t direct_lags = kDefaultDirectLags);

  /// Appends x_m (m = size()) and returns y_m.
  double push(double x);

  std::size_t size() const noexcept { return inputs_.size(); }
  std::size_t horizon() const noexcept { return horizon_; }
  std::span<const double> inputs() const noexcept { return inputs_; }

  /// Forgets all inputs; the kernel spectra are kept.
  void reset();

private:
  struct Level {
    std::size_t block = 0;
    RealFft fft;
    std::vector<std::complex<double>> kernel_spectrum;
    std::vector<std::complex<double>> work_spectrum;
    std::vector<double> work;
  };

  void flush_block(Level& level, std::size_t block_start);

  std::vector<double> kernel_;
  std::size_t horizon_;
  std::size_t direct_lags_;
  std::vector<Level> levels_;
  std::vector<double> inputs_;
  std::vector<double> pending_;
};

/// Plain O(n * m) full linear convolution; reference path for tests and small sizes.
std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b);

} // namespace pdphase
