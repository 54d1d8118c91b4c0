// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/dsp/stft.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "arraysep/dsp/fft.h"

namespace arraysep::dsp {

std::size_t StftConfig::window_length() const {
  return static_cast<std::size_t>(std::lround(window_len_s * sample_rate));
}

std::size_t StftConfig::hop() const {
  return static_cast<std::size_t>(std::lround(shift_s * sample_rate));
}

void StftConfig::validate() const {
  if (sample_rate <= 0 || window_length() == 0 || hop() == 0) {
    throw std::invalid_argument("stft config: non-positive sizes");
  }
  if (window_length() % hop() != 0 || window_length() % 2 != 0) {
    throw std::invalid_argument(
        "stft config: hop must divide an even window length");
  }
}

ComplexSpectrogram ComplexSpectrogram::channel(std::size_t c) const {
  ComplexSpectrogram out = with_channels(1);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) out.at(t, f, 0) = at(t, f, c);
  }
  return out;
}

ComplexSpectrogram ComplexSpectrogram::with_channels(std::size_t c) const {
  ComplexSpectrogram out(frames, bins, c);
  out.frame_shift_s = frame_shift_s;
  out.window_len_s = window_len_s;
  out.sample_rate = sample_rate;
  return out;
}

StftConfig ComplexSpectrogram::config() const {
  return StftConfig{window_len_s, frame_shift_s, sample_rate};
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

std::size_t num_frames(std::size_t num_samples, const StftConfig& config) {
  const std::size_t win = config.window_length();
  const std::size_t padded = num_samples + win;  // win/2 on each side
  return 1 + (padded - win) / config.hop();
}

std::vector<double> squared_window_envelope(std::size_t frames,
                                            const StftConfig& config) {
  const std::size_t win = config.window_length();
  const std::size_t hop = config.hop();
  const auto window = hann_window(win);
  std::vector<double> env((frames - 1) * hop + win, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < win; ++n) env[t * hop + n] += window[n] * window[n];
  }
  return env;
}

ComplexSpectrogram stft(const Waveform& wave, const StftConfig& config) {
  config.validate();
  wave.validate();
  const std::size_t win = config.window_length();
  const std::size_t half = win / 2;
  const std::size_t len = wave.num_samples();
  if (wave.num_channels() == 0) throw std::invalid_argument("stft: no channels");
  if (len < win) {
    throw std::invalid_argument("stft: signal of " + std::to_string(len) +
                                " samples is shorter than the window (" +
                                std::to_string(win) + ")");
  }
  if (wave.sample_rate != config.sample_rate) {
    throw std::invalid_argument("stft: waveform rate " +
                                std::to_string(wave.sample_rate) +
                                " does not match config rate " +
                                std::to_string(config.sample_rate));
  }

  const std::size_t frames = num_frames(len, config);
  ComplexSpectrogram spec(frames, config.num_bins(), wave.num_channels());
  spec.frame_shift_s = config.shift_s;
  spec.window_len_s = config.window_len_s;
  spec.sample_rate = config.sample_rate;

  const auto window = hann_window(win);
  RealFft fft(win);
  std::vector<double> padded(len + 2 * half);
  std::vector<double> frame(win);
  std::vector<Complex> bins(config.num_bins());

  for (std::size_t c = 0; c < wave.num_channels(); ++c) {
    const auto& x = wave.channels[c];
    // Reflect padding without repeating the edge sample.
    for (std::size_t i = 0; i < half; ++i) {
      padded[half - 1 - i] = x[i + 1];
      padded[half + len + i] = x[len - 2 - i];
    }
    std::copy(x.begin(), x.end(), padded.begin() + static_cast<long>(half));

    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t start = t * config.hop();
      for (std::size_t n = 0; n < win; ++n) frame[n] = padded[start + n] * window[n];
      fft.forward(frame, bins);
      for (std::size_t f = 0; f < bins.size(); ++f) spec.at(t, f, c) = bins[f];
    }
  }
  return spec;
}

Waveform istft(const ComplexSpectrogram& spec, const StftConfig& config,
               std::size_t num_samples) {
  config.validate();
  if (spec.bins != config.num_bins() || spec.sample_rate != config.sample_rate ||
      std::abs(spec.frame_shift_s - config.shift_s) > 1e-12 ||
      std::abs(spec.window_len_s - config.window_len_s) > 1e-12) {
    throw std::invalid_argument(
        "istft: spectrogram was not produced with this config");
  }
  if (spec.frames == 0) throw std::invalid_argument("istft: empty spectrogram");
  const std::size_t win = config.window_length();
  const std::size_t hop = config.hop();
  const std::size_t half = win / 2;
  const std::size_t natural = (spec.frames - 1) * hop;
  if (num_samples == 0) num_samples = natural;
  if (num_samples > natural + half) {
    throw std::invalid_argument("istft: requested length exceeds frame span");
  }

  const auto window = hann_window(win);
  const auto env = squared_window_envelope(spec.frames, config);
  RealFft fft(win);
  std::vector<Complex> bins(spec.bins);
  std::vector<double> frame(win);
  std::vector<double> acc(env.size());

  Waveform out(config.sample_rate, spec.channels, num_samples);
  for (std::size_t c = 0; c < spec.channels; ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < spec.frames; ++t) {
      for (std::size_t f = 0; f < spec.bins; ++f) bins[f] = spec.at(t, f, c);
      fft.inverse(bins, frame);
      for (std::size_t n = 0; n < win; ++n) acc[t * hop + n] += frame[n] * window[n];
    }
    for (std::size_t n = 0; n < num_samples; ++n) {
      const double e = env[n + half];
      out.channels[c][n] = e > 1e-10 ? acc[n + half] / e : 0.0;
    }
  }
  return out;
}

}  // namespace arraysep::dsp
