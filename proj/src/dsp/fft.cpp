// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/dsp/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace arraysep::dsp {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(std::size_t size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size == 0 || size % 2 != 0) {
    throw std::invalid_argument("RealFft size must be even and positive");
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->real = fftw_alloc_real(size);
  impl_->spectrum = fftw_alloc_complex(num_bins());
  const int n = static_cast<int>(size);
  impl_->forward = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spectrum,
                                        FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_dft_c2r_1d(n, impl_->spectrum, impl_->real,
                                        FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->inverse);
  fftw_free(impl_->real);
  fftw_free(impl_->spectrum);
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  if (in.size() != size_ || out.size() != num_bins()) {
    throw std::invalid_argument("RealFft::forward: size mismatch");
  }
  std::copy(in.begin(), in.end(), impl_->real);
  fftw_execute(impl_->forward);
  for (std::size_t k = 0; k < num_bins(); ++k) {
    out[k] = {impl_->spectrum[k][0], impl_->spectrum[k][1]};
  }
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  if (in.size() != num_bins() || out.size() != size_) {
    throw std::invalid_argument("RealFft::inverse: size mismatch");
  }
  for (std::size_t k = 0; k < num_bins(); ++k) {
    impl_->spectrum[k][0] = in[k].real();
    impl_->spectrum[k][1] = in[k].imag();
  }
  impl_->spectrum[0][1] = 0.0;
  impl_->spectrum[num_bins() - 1][1] = 0.0;
  fftw_execute(impl_->inverse);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t n = 0; n < size_; ++n) out[n] = impl_->real[n] * scale;
}

}  // namespace arraysep::dsp
