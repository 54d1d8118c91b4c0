// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "arraysep/dsp/stft.h"
#include "arraysep/dsp/wav.h"
#include "arraysep/fusion/fusion.h"
#include "arraysep/sdl/sdl.h"
#include "arraysep/separator/separator.h"
#include "arraysep/vme/vme.h"

// End-to-end separation model:
//
//   spectrogram (C channels) -> channel augmentation to M
//     -> spatial branch (dictionary embedding) and spectral branch (local
//        pattern extractor on the reference channel)
//     -> attentional fusion -> hierarchical dual-path separator
//     -> K complex spectrograms
//
// With the spatial branch switched off, the real/imaginary planes of all M
// channels are concatenated and projected to E instead.
namespace arraysep::pipeline {

enum class SpatialMode { kSdl, kFsdl, kOff };

SpatialMode parse_spatial_mode(const std::string& text);  // sdl | fsdl | off
std::string to_string(SpatialMode mode);

struct ModelConfig {
  std::string scale = "toy";
  std::size_t max_channels = 8;  // M
  vme::AugmentMode augment = vme::AugmentMode::kVme;
  SpatialMode spatial = SpatialMode::kSdl;
  sdl::InnerProduct inner_product = sdl::InnerProduct::kHermitian;
  // Spectrogram is divided by the RMS magnitude of the reference channel on
  // the way in and multiplied back on the way out.
  bool normalize_input = true;
  std::uint64_t seed = 1;
  dsp::StftConfig stft;
  fusion::FusionConfig fusion;
  separator::SeparatorConfig separator;

  // E = 8, level dims (8, 16, 32), conv kernel 7.
  static ModelConfig toy();
  // E = 64, level dims (64, 128, 256), conv kernel 15.
  static ModelConfig full();

  std::size_t embed_dim() const { return fusion.embed_dim; }
  void validate() const;

  // Canonical "key=value" lines covering every architecture field. Two
  // configs with the same fingerprint build parameter-compatible models.
  std::string fingerprint() const;
  // Applies one "key=value" override; throws std::invalid_argument for an
  // unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  static ModelConfig from_fingerprint(const std::string& text);
};

template <typename Real>
class SeparationModel {
 public:
  explicit SeparationModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const nn::ParamSet<Real>& params() const { return params_; }

  // Mixture spectrogram with 1..M channels -> [T, F, 2K] separated spectra.
  nn::Tensor<Real> forward(const dsp::ComplexSpectrogram& mixture) const;

  // Fused [T, F, E] features fed to the separator (for inspection).
  nn::Tensor<Real> features(const dsp::ComplexSpectrogram& mixture) const;

  // Waveform in, K mono waveforms of the input length out. No gradients.
  std::vector<dsp::Waveform> separate(const dsp::Waveform& mixture) const;

  // Checks channel count and STFT metadata; returns the normalization gain.
  double check_input(const dsp::ComplexSpectrogram& mixture) const;

  fusion::LocalPatternExtractor<Real> extractor;
  sdl::SpatialDictionary<Real> dictionary;
  fusion::AttentionalFusion<Real> fusion_block;
  nn::Linear<Real> concat_projection;  // spatial mode off only
  separator::Separator<Real> separator_net;

 private:
  ModelConfig config_;
  nn::ParamSet<Real> params_;
};

// Converts [T, F, 2K] network output to a K-channel complex spectrogram.
template <typename Real>
dsp::ComplexSpectrogram to_spectrogram(const nn::Tensor<Real>& packed, const dsp::StftConfig& config);

extern template class SeparationModel<float>;
extern template class SeparationModel<double>;

}  // namespace arraysep::pipeline
