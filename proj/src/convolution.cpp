#include "pdphase/convolution.hpp"

#include <algorithm>
#include <stdexcept>

namespace pdphase {

OnlineConvolver::OnlineConvolver(std::span<const double> kernel, std::size_t horizon,
                                 std::size_t direct_lags)
    : kernel_(kernel.begin(), kernel.begin() + std::min(kernel.size(), horizon)),
      horizon_(horizon),
      direct_lags_(std::max<std::size_t>(1, std::min(direct_lags, kernel_.size()))) {
  if (kernel_.empty()) direct_lags_ = 0;
  inputs_.reserve(horizon_);
  pending_.assign(horizon_, 0.0);

  for (std::size_t block = direct_lags_; block > 0 && block < kernel_.size(); block *= 2) {
    Level level{block, RealFft(2 * block), {}, {}, {}};
    const std::size_t seg_end = std::min(2 * block, kernel_.size());
    level.kernel_spectrum.resize(level.fft.spectrum_size());
    level.fft.forward(std::span(kernel_).subspan(block, seg_end - block), level.kernel_spectrum);
    level.work_spectrum.resize(level.fft.spectrum_size());
    level.work.resize(2 * block);
    levels_.push_back(std::move(level));
  }
}

double OnlineConvolver::push(double x) {
  const std::size_t m = inputs_.size();
  if (m >= horizon_) throw std::out_of_range("OnlineConvolver: pushed past horizon");
  inputs_.push_back(x);

  double y = pending_[m];
  const std::size_t lags = std::min(direct_lags_, m + 1);
  const double* xs = inputs_.data() + m;
  for (std::size_t l = 0; l < lags; ++l) y += xs[-static_cast<std::ptrdiff_t>(l)] * kernel_[l];

  const std::size_t count = m + 1;
  for (auto& level : levels_) {
    if (count % level.block != 0) continue;
    flush_block(level, count - level.block);
  }
  return y;
}

void OnlineConvolver::flush_block(Level& level, std::size_t block_start) {
  const std::size_t block = level.block;
  // Outputs touched: block_start + block + [0, 2*block - 1).
  const std::size_t first_out = block_start + block;
  if (first_out >= horizon_) return;

  level.fft.forward(std::span(inputs_).subspan(block_start, block), level.work_spectrum);
  for (std::size_t k = 0; k < level.work_spectrum.size(); ++k)
    level.work_spectrum[k] *= level.kernel_spectrum[k];
  level.fft.inverse(level.work_spectrum, level.work);

  const double scale = 1.0 / static_cast<double>(2 * block);
  const std::size_t n_out = std::min(2 * block - 1, horizon_ - first_out);
  for (std::size_t i = 0; i < n_out; ++i) pending_[first_out + i] += level.work[i] * scale;
}

void OnlineConvolver::reset() {
  inputs_.clear();
  std::fill(pending_.begin(), pending_.end(), 0.0);
}

std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

} // namespace pdphase
