#include "pdphase/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace pdphase {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: zero length");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* cplx = fftw_alloc_complex(n / 2 + 1);
  complex_ = cplx;
  const int len = static_cast<int>(n);
  forward_plan_ = fftw_plan_dft_r2c_1d(len, real_, cplx, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(len, cplx, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      real_(std::exchange(other.real_, nullptr)),
      complex_(std::exchange(other.complex_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)) {}

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    real_ = std::exchange(other.real_, nullptr);
    complex_ = std::exchange(other.complex_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
  }
  return *this;
}

void RealFft::release() noexcept {
  if (!real_) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(complex_);
  real_ = nullptr;
  complex_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t m = std::min(in.size(), n_);
  std::copy_n(in.begin(), m, real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  auto* cplx = static_cast<fftw_complex*>(complex_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real_, cplx);
  const std::size_t k = std::min(out.size(), spectrum_size());
  for (std::size_t i = 0; i < k; ++i) out[i] = {cplx[i][0], cplx[i][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  auto* cplx = static_cast<fftw_complex*>(complex_);
  const std::size_t k = spectrum_size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto v = i < in.size() ? in[i] : std::complex<double>{};
    cplx[i][0] = v.real();
    cplx[i][1] = v.imag();
  }
  // c2r destroys its input; it lives in our own buffer.
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), cplx, real_);
  std::copy_n(real_, std::min(out.size(), n_), out.begin());
}

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  RealFft fft(x.size());
  std::vector<std::complex<double>> out(fft.spectrum_size());
  fft.forward(x, out);
  return out;
}

} // namespace pdphase
