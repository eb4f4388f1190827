#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pdphase {

/// Real-to-complex / complex-to-real FFT pair of fixed length, backed by FFTW.
/// Plans are created and destroyed under a process-wide lock (FFTW's planner
/// is not reentrant); execution is lock-free, so one instance per thread.
class RealFft {
public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  /// Unnormalized forward transform; `in` may be shorter than size() (zero padded).
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Unnormalized inverse: out[t] = sum_k in[k] e^{+2 pi i k t / n}.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
  void release() noexcept;

  std::size_t n_ = 0;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

std::vector<std::complex<double>> rfft(std::span<const double> x);

} // namespace pdphase
