// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "arraysep/dsp/fft.h"
#include "arraysep/dsp/stft.h"
#include "arraysep/dsp/wav.h"
#include "arraysep/verify/oracles.h"

namespace dsp = arraysep::dsp;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "arraysep_test_dsp";
  fs::create_directories(dir);
  return dir / name;
}

dsp::Waveform noise(std::size_t channels, std::size_t samples, std::uint64_t seed, double amp = 0.3) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  dsp::Waveform w(16000, channels, samples);
  for (auto& ch : w.channels) {
    for (auto& x : ch) x = u(eng);
  }
  return w;
}

double error_db(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo, std::size_t hi) {
  double e = 0.0, r = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    e += (a[i] - b[i]) * (a[i] - b[i]);
    r += b[i] * b[i];
  }
  return 10.0 * std::log10(e / r + 1e-300);
}

}  // namespace

TEST(Wav, MonoFloatRoundTripIsExact) {
  const auto w = noise(1, 64000, 1);
  const fs::path p = temp_file("mono.wav");
  dsp::write_wav(p, w);
  const auto r = dsp::read_wav(p);
  ASSERT_EQ(r.num_channels(), 1u);
  ASSERT_EQ(r.num_samples(), 64000u);
  EXPECT_EQ(r.sample_rate, 16000);
  for (std::size_t i = 0; i < 64000; ++i) {
    ASSERT_EQ(r.channels[0][i], static_cast<double>(static_cast<float>(w.channels[0][i])));
  }
}

TEST(Wav, Pcm16RoundTripWithinOneLsb) {
  const auto w = noise(3, 5000, 2, 0.9);
  const fs::path p = temp_file("pcm.wav");
  dsp::write_wav(p, w, dsp::SampleFormat::kPcm16);
  const auto r = dsp::read_wav(p);
  ASSERT_EQ(r.num_channels(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 5000; ++i) ASSERT_NEAR(r.channels[c][i], w.channels[c][i], 1.0 / 32768.0);
  }
}

TEST(Wav, TruncatedHeaderIsMalformed) {
  const fs::path p = temp_file("trunc.wav");
  dsp::write_wav(p, noise(1, 100, 3));
  fs::resize_file(p, 20);
  try {
    dsp::read_wav(p);
    FAIL() << "expected WavError";
  } catch (const dsp::WavError& e) {
    EXPECT_EQ(e.kind(), dsp::WavErrorKind::kMalformed);
  }
}

TEST(Wav, MissingFileIsIoError) {
  try {
    dsp::read_wav(temp_file("does_not_exist.wav"));
    FAIL() << "expected WavError";
  } catch (const dsp::WavError& e) {
    EXPECT_EQ(e.kind(), dsp::WavErrorKind::kIo);
  }
}

TEST(Wav, TooManyChannelsRejected) {
  EXPECT_THROW(dsp::write_wav(temp_file("nine.wav"), noise(9, 10, 4)), dsp::WavError);
}

TEST(Fft, MatchesDirectDft) {
  constexpr std::size_t n = 16;
  std::vector<double> x(n);
  std::mt19937_64 eng(5);
  std::normal_distribution<double> nd;
  for (auto& v : x) v = nd(eng);
  dsp::RealFft fft(n);
  std::vector<std::complex<double>> out(fft.num_bins());
  fft.forward(x, out);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t t = 0; t < n; ++t) s += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n);
    EXPECT_NEAR(std::abs(out[k] - s), 0.0, 1e-12);
  }
  std::vector<double> back(n);
  fft.inverse(out, back);
  for (std::size_t t = 0; t < n; ++t) EXPECT_NEAR(back[t], x[t], 1e-14);
}

TEST(Stft, HannIsPeriodic) {
  const auto w = dsp::hann_window(8);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[4], 1.0);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
  EXPECT_NEAR(w[6], 0.5, 1e-15);
}

TEST(Stft, FourSecondsGivesFrameAndBinCountsOfThePaddingRule) {
  const dsp::StftConfig cfg;
  EXPECT_EQ(cfg.window_length(), 512u);
  EXPECT_EQ(cfg.hop(), 256u);
  const auto spec = dsp::stft(noise(1, 64000, 6), cfg);
  EXPECT_EQ(spec.frames, arraysep::verify::frame_count_oracle(64000, cfg));
  EXPECT_EQ(spec.frames, 251u);  // enumerated: 1 + 64000 / 256
  EXPECT_EQ(spec.bins, 257u);
  EXPECT_EQ(dsp::num_frames(32000, cfg), 126u);
}

TEST(Stft, FrameCountMatchesEnumerationForManyLengths) {
  const dsp::StftConfig cfg;
  for (std::size_t n = 512; n < 3000; n += 37) {
    EXPECT_EQ(dsp::num_frames(n, cfg), arraysep::verify::frame_count_oracle(n, cfg)) << n;
  }
}

TEST(Stft, ZeroInputGivesZeroSpectrogram) {
  dsp::Waveform w(16000, 2, 4000);
  const auto spec = dsp::stft(w);
  for (const auto& z : spec.data) ASSERT_EQ(z, dsp::Complex(0.0, 0.0));
}

TEST(Stft, BinCenteredSineMatchesDirectWindowedDft) {
  const dsp::StftConfig cfg;
  constexpr std::size_t k = 40;
  const std::size_t n = 16000;
  dsp::Waveform w(16000, 1, n);
  for (std::size_t i = 0; i < n; ++i) w.channels[0][i] = std::sin(2.0 * std::numbers::pi * k * i / 512.0);
  const auto spec = dsp::stft(w, cfg);
  const auto window = dsp::hann_window(512);

  for (std::size_t t = 2; t + 2 < spec.frames; ++t) {
    // interior frame t starts at sample t * hop - win / 2 of the signal
    const std::size_t start = t * 256 - 256;
    double total = 0.0, in_k = 0.0, near_k = 0.0;
    for (std::size_t f = 0; f < spec.bins; ++f) {
      std::complex<double> direct = 0.0;
      if (f + 2 >= k && f <= k + 2) {
        for (std::size_t m = 0; m < 512; ++m) {
          direct += window[m] * w.channels[0][start + m] * std::polar(1.0, -2.0 * std::numbers::pi * f * m / 512.0);
        }
        EXPECT_NEAR(std::abs(spec.at(t, f, 0) - direct), 0.0, 1e-9);
      }
      const double e = std::norm(spec.at(t, f, 0));
      total += e;
      if (f == k) in_k += e;
      if (f + 1 >= k && f <= k + 1) near_k += e;
    }
    // Hann main lobe: bins k-1, k, k+1 carry N/8, N/4, N/8, so bin k holds 2/3.
    EXPECT_NEAR(in_k / total, 2.0 / 3.0, 1e-9);
    EXPECT_GT(near_k / total, 1.0 - 1e-12);
  }
}

TEST(Stft, RoundTripBelowMinus60Db) {
  const dsp::StftConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = noise(2, 64000 + 37 * seed, 10 + seed);
    const auto spec = dsp::stft(w, cfg);
    const auto back = dsp::istft(spec, cfg, w.num_samples());
    ASSERT_EQ(back.num_samples(), w.num_samples());
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_LT(error_db(back.channels[c], w.channels[c], 0, w.num_samples()), -60.0);
    }
  }
}

TEST(Stft, ZeroSpectrogramGivesZeroWaveform) {
  const dsp::StftConfig cfg;
  const auto spec = dsp::stft(dsp::Waveform(16000, 1, 2000), cfg);
  const auto w = dsp::istft(spec, cfg, 2000);
  for (double x : w.channels[0]) ASSERT_EQ(x, 0.0);
}

TEST(Stft, SingleFrameStaysInsideItsWindowSpan) {
  const dsp::StftConfig cfg;
  auto spec = dsp::stft(dsp::Waveform(16000, 1, 4000), cfg);
  constexpr std::size_t t = 5;
  std::mt19937_64 eng(7);
  std::normal_distribution<double> nd;
  for (std::size_t f = 0; f < spec.bins; ++f) spec.at(t, f, 0) = {nd(eng), nd(eng)};
  const auto w = dsp::istft(spec, cfg, 4000);
  const std::size_t lo = t * 256 - 256, hi = t * 256 + 256;
  double inside = 0.0;
  for (std::size_t i = 0; i < w.num_samples(); ++i) {
    if (i < lo || i >= hi) {
      ASSERT_EQ(w.channels[0][i], 0.0) << i;
    } else {
      inside += std::abs(w.channels[0][i]);
    }
  }
  EXPECT_GT(inside, 0.0);
}

TEST(Stft, RejectsMismatchedConfig) {
  const auto spec = dsp::stft(noise(1, 4000, 8));
  dsp::StftConfig other;
  other.shift_s = 0.008;
  EXPECT_THROW(dsp::istft(spec, other), std::invalid_argument);
  dsp::StftConfig bad;
  bad.shift_s = 0.005;  // 80 does not divide 512
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
