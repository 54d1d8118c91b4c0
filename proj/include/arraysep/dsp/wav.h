// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace arraysep::dsp {

// Multi-channel real waveform, stored channel-major: channels[c][n].
struct Waveform {
  int sample_rate = 16000;
  std::vector<std::vector<double>> channels;

  Waveform() = default;
  Waveform(int rate, std::size_t num_channels, std::size_t num_samples);

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  // Throws std::invalid_argument when the channel lengths differ or the rate
  // is not positive.
  void validate() const;

  static Waveform mono(int rate, std::vector<double> samples);
};

enum class WavErrorKind { kIo, kMalformed, kUnsupportedCodec, kChannelMismatch };

class WavError : public std::runtime_error {
 public:
  WavError(WavErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  WavErrorKind kind() const { return kind_; }

 private:
  WavErrorKind kind_;
};

enum class SampleFormat { kPcm16, kFloat32 };

inline constexpr std::size_t kMaxWavChannels = 8;

// Reads PCM-16 or IEEE float32 RIFF/WAVE (plain or WAVE_FORMAT_EXTENSIBLE).
Waveform read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const Waveform& wave,
               SampleFormat format = SampleFormat::kFloat32);

}  // namespace arraysep::dsp
