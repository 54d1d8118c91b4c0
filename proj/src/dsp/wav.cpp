// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/dsp/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace arraysep::dsp {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wav codec assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::vector<char>& buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

Waveform::Waveform(int rate, std::size_t num_channels, std::size_t num_samples)
    : sample_rate(rate),
      channels(num_channels, std::vector<double>(num_samples, 0.0)) {}

void Waveform::validate() const {
  if (sample_rate <= 0) {
    throw std::invalid_argument("waveform sample rate must be positive");
  }
  for (const auto& ch : channels) {
    if (ch.size() != num_samples()) {
      throw std::invalid_argument("waveform channels differ in length");
    }
  }
}

Waveform Waveform::mono(int rate, std::vector<double> samples) {
  Waveform w;
  w.sample_rate = rate;
  w.channels.push_back(std::move(samples));
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavErrorKind::kIo, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());

  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw WavError(WavErrorKind::kMalformed,
                   path.string() + ": missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0, data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::uint32_t chunk_size = load<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + chunk_size > buf.size()) {
        throw WavError(WavErrorKind::kMalformed,
                       path.string() + ": truncated fmt chunk");
      }
      format = load<std::uint16_t>(buf, body);
      channels = load<std::uint16_t>(buf, body + 2);
      rate = load<std::uint32_t>(buf, body + 4);
      block_align = load<std::uint16_t>(buf, body + 12);
      bits = load<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) {
          throw WavError(WavErrorKind::kMalformed,
                         path.string() + ": truncated extensible fmt chunk");
        }
        // First two bytes of the SubFormat GUID carry the codec tag.
        format = load<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
      data_offset = body;
      data_size = std::min<std::size_t>(chunk_size, buf.size() - body);
      have_data = true;
      break;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt || !have_data) {
    throw WavError(WavErrorKind::kMalformed,
                   path.string() + ": missing fmt or data chunk");
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw WavError(WavErrorKind::kUnsupportedCodec,
                   path.string() + ": only PCM-16 and float32 are supported");
  }
  if (channels == 0 || channels > kMaxWavChannels) {
    throw WavError(WavErrorKind::kChannelMismatch,
                   path.string() + ": unsupported channel count " +
                       std::to_string(channels));
  }
  if (rate == 0 || block_align != channels * (bits / 8)) {
    throw WavError(WavErrorKind::kMalformed,
                   path.string() + ": inconsistent fmt chunk");
  }

  const std::size_t frames = data_size / block_align;
  Waveform wave(static_cast<int>(rate), channels, frames);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_offset + n * block_align + c * (bits / 8);
      wave.channels[c][n] =
          pcm16 ? load<std::int16_t>(buf, at) / 32768.0
                : static_cast<double>(load<float>(buf, at));
    }
  }
  return wave;
}

void write_wav(const std::filesystem::path& path, const Waveform& wave,
               SampleFormat format) {
  if (wave.num_channels() == 0 || wave.num_channels() > kMaxWavChannels) {
    throw WavError(WavErrorKind::kChannelMismatch,
                   "cannot write " + std::to_string(wave.num_channels()) +
                       " channels");
  }
  for (const auto& ch : wave.channels) {
    if (ch.size() != wave.num_samples()) {
      throw WavError(WavErrorKind::kChannelMismatch,
                     "channel lengths differ; cannot interleave");
    }
  }
  if (wave.sample_rate <= 0) {
    throw WavError(WavErrorKind::kMalformed, "sample rate must be positive");
  }

  const std::uint16_t channels = static_cast<std::uint16_t>(wave.num_channels());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block_align = channels * bits / 8;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(wave.num_samples() * block_align);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError(WavErrorKind::kIo, "cannot create " + path.string());
  out.write("RIFF", 4);
  store<std::uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  store<std::uint32_t>(out, 16);
  store<std::uint16_t>(out, format == SampleFormat::kPcm16 ? kFormatPcm
                                                           : kFormatFloat);
  store<std::uint16_t>(out, channels);
  store<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
  store<std::uint32_t>(out,
                       static_cast<std::uint32_t>(wave.sample_rate) * block_align);
  store<std::uint16_t>(out, block_align);
  store<std::uint16_t>(out, bits);
  out.write("data", 4);
  store<std::uint32_t>(out, data_size);

  for (std::size_t n = 0; n < wave.num_samples(); ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = wave.channels[c][n];
      if (format == SampleFormat::kPcm16) {
        const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
        store<std::int16_t>(out, static_cast<std::int16_t>(
                                     std::clamp(scaled, -32768.0, 32767.0)));
      } else {
        store<float>(out, static_cast<float>(x));
      }
    }
  }
  if (!out) throw WavError(WavErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace arraysep::dsp
