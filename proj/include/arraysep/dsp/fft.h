// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace arraysep::dsp {

// Real-input FFT of a fixed even length backed by FFTW. Each instance owns
// its aligned buffers and is not safe to share between threads; plan creation
// is serialized internally.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return size_; }
  std::size_t num_bins() const { return size_ / 2 + 1; }

  // Unnormalized forward transform: out[k] = sum_n in[n] e^{-2 pi i k n / N}.
  void forward(std::span<const double> in,
               std::span<std::complex<double>> out);
  // Inverse with 1/N scaling. Imaginary parts of the DC and Nyquist bins are
  // ignored, matching a Hermitian-symmetric interpretation of the input.
  void inverse(std::span<const std::complex<double>> in,
               std::span<double> out);

 private:
  struct Impl;
  std::size_t size_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arraysep::dsp
