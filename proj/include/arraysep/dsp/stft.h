// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "arraysep/dsp/wav.h"

namespace arraysep::dsp {

using Complex = std::complex<double>;

// Analysis parameters. The FFT size equals the window length, so a 32 ms
// window at 16 kHz yields 512-point frames and 257 bins.
struct StftConfig {
  double window_len_s = 0.032;
  double shift_s = 0.016;
  int sample_rate = 16000;

  std::size_t window_length() const;
  std::size_t hop() const;
  std::size_t fft_size() const { return window_length(); }
  std::size_t num_bins() const { return fft_size() / 2 + 1; }
  // Throws std::invalid_argument unless the hop divides the window.
  void validate() const;
  bool operator==(const StftConfig&) const = default;
};

// T x F x C complex tensor, channel index fastest.
struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t channels = 0;
  std::vector<Complex> data;
  double frame_shift_s = 0.016;
  double window_len_s = 0.032;
  int sample_rate = 16000;

  ComplexSpectrogram() = default;
  ComplexSpectrogram(std::size_t t, std::size_t f, std::size_t c)
      : frames(t), bins(f), channels(c), data(t * f * c) {}

  std::size_t index(std::size_t t, std::size_t f, std::size_t c) const {
    return (t * bins + f) * channels + c;
  }
  Complex& at(std::size_t t, std::size_t f, std::size_t c) {
    return data[index(t, f, c)];
  }
  const Complex& at(std::size_t t, std::size_t f, std::size_t c) const {
    return data[index(t, f, c)];
  }

  // Copies one channel into a T x F x 1 spectrogram.
  ComplexSpectrogram channel(std::size_t c) const;
  // Builds a spectrogram with the same metadata but a different channel count.
  ComplexSpectrogram with_channels(std::size_t c) const;
  StftConfig config() const;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Number of frames produced for a signal of num_samples samples: the signal
// is reflect-padded by half a window on both sides, then framed with the hop.
std::size_t num_frames(std::size_t num_samples, const StftConfig& config);

ComplexSpectrogram stft(const Waveform& wave, const StftConfig& config = {});

// Weighted overlap-add inverse. num_samples selects the output length; zero
// means (frames - 1) * hop. Lengths up to (frames - 1) * hop + window / 2 are
// covered by at least one frame, so any signal analysed by stft() can be
// restored at its original length.
Waveform istft(const ComplexSpectrogram& spec, const StftConfig& config = {},
               std::size_t num_samples = 0);

// Sum of squared analysis windows over the padded frame span; the synthesis
// normalizer shared by istft and the differentiable synthesis in training.
std::vector<double> squared_window_envelope(std::size_t frames,
                                            const StftConfig& config);

}  // namespace arraysep::dsp
