// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/pipeline/model.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "arraysep/nn/ops.h"

namespace arraysep::pipeline {

SpatialMode parse_spatial_mode(const std::string& text) {
  if (text == "sdl") return SpatialMode::kSdl;
  if (text == "fsdl") return SpatialMode::kFsdl;
  if (text == "off") return SpatialMode::kOff;
  throw std::invalid_argument("unknown spatial mode '" + text + "' (expected sdl, fsdl or off)");
}

std::string to_string(SpatialMode mode) {
  switch (mode) {
    case SpatialMode::kSdl: return "sdl";
    case SpatialMode::kFsdl: return "fsdl";
    case SpatialMode::kOff: return "off";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text.front() == '-') {
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) {
    throw std::invalid_argument(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_size(key, item));
  if (out.empty()) throw std::invalid_argument(key + ": empty list");
  return out;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.scale = "toy";
  c.fusion.embed_dim = 8;
  c.separator.input_dim = 8;
  c.separator.level_dims = {8, 16, 32};
  c.separator.conformer.conv_kernel = 7;
  return c;
}

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.scale = "full";
  c.fusion.embed_dim = 64;
  c.separator.input_dim = 64;
  c.separator.level_dims = {64, 128, 256};
  c.separator.conformer.conv_kernel = 15;
  return c;
}

void ModelConfig::validate() const {
  stft.validate();
  fusion.validate();
  separator.validate();
  if (max_channels == 0) throw std::invalid_argument("max_channels must be >= 1");
  if (fusion.reference_channel >= max_channels) {
    throw std::invalid_argument("reference_channel must be below max_channels");
  }
  if (separator.input_dim != fusion.embed_dim) {
    throw std::invalid_argument("separator input dim must equal the embedding dim");
  }
}

std::string ModelConfig::fingerprint() const {
  std::ostringstream s;
  s << "scale=" << scale << "\n"
    << "max_channels=" << max_channels << "\n"
    << "augment=" << vme::to_string(augment) << "\n"
    << "spatial=" << to_string(spatial) << "\n"
    << "inner_product=" << sdl::to_string(inner_product) << "\n"
    << "normalize_input=" << (normalize_input ? "true" : "false") << "\n"
    << "stft.window_len_s=" << exact(stft.window_len_s) << "\n"
    << "stft.shift_s=" << exact(stft.shift_s) << "\n"
    << "stft.sample_rate=" << stft.sample_rate << "\n"
    << "embed_dim=" << fusion.embed_dim << "\n"
    << "reference_channel=" << fusion.reference_channel << "\n"
    << "extractor_kernel=" << fusion.extractor_kernel << "\n"
    << "aff_bottleneck_ratio=" << fusion.aff_bottleneck_ratio << "\n"
    << "aff_iterations=" << fusion.aff_iterations << "\n"
    << "merge_windows=" << join(separator.merge_windows) << "\n"
    << "level_dims=" << join(separator.level_dims) << "\n"
    << "num_speakers=" << separator.num_speakers << "\n"
    << "num_heads=" << separator.conformer.num_heads << "\n"
    << "ff_expansion=" << separator.conformer.ff_expansion << "\n"
    << "conv_kernel=" << separator.conformer.conv_kernel << "\n"
    << "layers_per_path=" << separator.conformer.num_layers_per_path << "\n"
    << "skip_connections=" << (separator.skip_connections ? "true" : "false") << "\n"
    << "bottleneck_block=" << (separator.bottleneck_block ? "true" : "false") << "\n"
    << "decoder_dual_path=" << (separator.decoder_dual_path ? "true" : "false") << "\n";
  return s.str();
}

void ModelConfig::set(const std::string& key, const std::string& value) {
  if (key == "scale") {
    if (value == "toy" || value == "full") {
      const std::uint64_t keep_seed = seed;
      *this = value == "toy" ? toy() : full();
      seed = keep_seed;
    } else {
      throw std::invalid_argument("scale: expected toy or full, got '" + value + "'");
    }
  } else if (key == "max_channels") {
    max_channels = parse_size(key, value);
  } else if (key == "augment") {
    augment = vme::parse_augment_mode(value);
  } else if (key == "spatial") {
    spatial = parse_spatial_mode(value);
  } else if (key == "inner_product") {
    inner_product = sdl::parse_inner_product(value);
  } else if (key == "normalize_input") {
    normalize_input = parse_bool(key, value);
  } else if (key == "seed") {
    seed = parse_size(key, value);
  } else if (key == "stft.window_len_s") {
    stft.window_len_s = parse_double(key, value);
  } else if (key == "stft.shift_s") {
    stft.shift_s = parse_double(key, value);
  } else if (key == "stft.sample_rate") {
    stft.sample_rate = static_cast<int>(parse_size(key, value));
  } else if (key == "embed_dim") {
    fusion.embed_dim = separator.input_dim = parse_size(key, value);
  } else if (key == "reference_channel") {
    fusion.reference_channel = parse_size(key, value);
  } else if (key == "extractor_kernel") {
    fusion.extractor_kernel = parse_size(key, value);
  } else if (key == "aff_bottleneck_ratio") {
    fusion.aff_bottleneck_ratio = parse_size(key, value);
  } else if (key == "aff_iterations") {
    fusion.aff_iterations = parse_size(key, value);
  } else if (key == "merge_windows") {
    separator.merge_windows = parse_list(key, value);
  } else if (key == "level_dims") {
    separator.level_dims = parse_list(key, value);
  } else if (key == "num_speakers") {
    separator.num_speakers = parse_size(key, value);
  } else if (key == "num_heads") {
    separator.conformer.num_heads = parse_size(key, value);
  } else if (key == "ff_expansion") {
    separator.conformer.ff_expansion = parse_size(key, value);
  } else if (key == "conv_kernel") {
    separator.conformer.conv_kernel = parse_size(key, value);
  } else if (key == "layers_per_path") {
    separator.conformer.num_layers_per_path = parse_size(key, value);
  } else if (key == "skip_connections") {
    separator.skip_connections = parse_bool(key, value);
  } else if (key == "bottleneck_block") {
    separator.bottleneck_block = parse_bool(key, value);
  } else if (key == "decoder_dual_path") {
    separator.decoder_dual_path = parse_bool(key, value);
  } else {
    throw std::invalid_argument("unknown model key '" + key + "'");
  }
}

ModelConfig ModelConfig::from_fingerprint(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed fingerprint line: " + line);
    c.set(line.substr(0, eq), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

template <typename Real>
SeparationModel<Real>::SeparationModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  nn::Rng rng(config_.seed);
  const std::size_t e = config_.embed_dim();
  const std::size_t m = config_.max_channels;
  if (config_.spatial == SpatialMode::kOff) {
    concat_projection = nn::Linear<Real>(2 * m, e, rng);
    concat_projection.collect(params_, "input_projection");
  } else {
    extractor = fusion::LocalPatternExtractor<Real>(config_.fusion, rng);
    const auto variant = config_.spatial == SpatialMode::kSdl ? sdl::SdlVariant::kShared
                                                              : sdl::SdlVariant::kFrequency;
    dictionary = sdl::init_dictionary<Real>(m, e, variant, config_.stft.num_bins(), rng);
    fusion_block = fusion::AttentionalFusion<Real>(config_.fusion, rng);
    extractor.collect(params_, "extractor");
    dictionary.collect(params_, "dictionary");
    fusion_block.collect(params_, "fusion");
  }
  separator_net = separator::Separator<Real>(config_.separator, rng);
  separator_net.collect(params_, "separator");
}

template <typename Real>
double SeparationModel<Real>::check_input(const dsp::ComplexSpectrogram& mixture) const {
  if (mixture.channels == 0 || mixture.channels > config_.max_channels) {
    throw std::invalid_argument("model accepts 1.." + std::to_string(config_.max_channels) +
                                " channels, got " + std::to_string(mixture.channels));
  }
  if (mixture.bins != config_.stft.num_bins() || !(mixture.config() == config_.stft)) {
    throw std::invalid_argument("spectrogram does not match the model STFT configuration");
  }
  if (mixture.frames == 0) throw std::invalid_argument("empty spectrogram");
  if (!config_.normalize_input) return 1.0;
  const std::size_t ref = config_.fusion.reference_channel;
  if (ref >= mixture.channels) {
    throw std::invalid_argument("reference channel " + std::to_string(ref) + " missing from a " +
                                std::to_string(mixture.channels) + "-channel input");
  }
  double power = 0.0;
  for (std::size_t t = 0; t < mixture.frames; ++t) {
    for (std::size_t f = 0; f < mixture.bins; ++f) power += std::norm(mixture.at(t, f, ref));
  }
  const double rms = std::sqrt(power / static_cast<double>(mixture.frames * mixture.bins));
  return rms > 0.0 ? rms : 1.0;
}

template <typename Real>
nn::Tensor<Real> SeparationModel<Real>::features(const dsp::ComplexSpectrogram& mixture) const {
  const double gain = check_input(mixture);
  dsp::ComplexSpectrogram x = vme::augment_channels(mixture, config_.max_channels, config_.augment);
  if (gain != 1.0) {
    for (auto& z : x.data) z /= gain;
  }
  if (config_.spatial == SpatialMode::kOff) {
    return concat_projection(fusion::all_planes<Real>(x));
  }
  const nn::Tensor<Real> spectral = extractor(x);
  const nn::Tensor<Real> spatial = sdl::spatial_embed(x, dictionary, config_.inner_product);
  return fusion_block(spectral, spatial);
}

template <typename Real>
nn::Tensor<Real> SeparationModel<Real>::forward(const dsp::ComplexSpectrogram& mixture) const {
  const double gain = check_input(mixture);
  nn::Tensor<Real> out = separator_net(features(mixture));
  return gain != 1.0 ? nn::affine(out, gain) : out;
}

template <typename Real>
std::vector<dsp::Waveform> SeparationModel<Real>::separate(const dsp::Waveform& mixture) const {
  nn::NoGradGuard no_grad;
  const dsp::ComplexSpectrogram spec = dsp::stft(mixture, config_.stft);
  const dsp::ComplexSpectrogram est = to_spectrogram(forward(spec), config_.stft);
  const dsp::Waveform all = dsp::istft(est, config_.stft, mixture.num_samples());
  std::vector<dsp::Waveform> out;
  for (const auto& ch : all.channels) {
    dsp::Waveform w;
    w.sample_rate = all.sample_rate;
    w.channels.push_back(ch);
    out.push_back(std::move(w));
  }
  return out;
}

template <typename Real>
dsp::ComplexSpectrogram to_spectrogram(const nn::Tensor<Real>& packed, const dsp::StftConfig& config) {
  if (packed.rank() != 3 || packed.dim(2) % 2 != 0) {
    throw std::invalid_argument("expected [T, F, 2K] output, got " + nn::to_string(packed.shape()));
  }
  const std::size_t k = packed.dim(2) / 2;
  dsp::ComplexSpectrogram spec(packed.dim(0), packed.dim(1), k);
  spec.frame_shift_s = config.shift_s;
  spec.window_len_s = config.window_len_s;
  spec.sample_rate = config.sample_rate;
  const auto v = packed.data();
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    spec.data[i] = {static_cast<double>(v[2 * i]), static_cast<double>(v[2 * i + 1])};
  }
  return spec;
}

template class SeparationModel<float>;
template class SeparationModel<double>;
template dsp::ComplexSpectrogram to_spectrogram<float>(const nn::Tensor<float>&, const dsp::StftConfig&);
template dsp::ComplexSpectrogram to_spectrogram<double>(const nn::Tensor<double>&, const dsp::StftConfig&);

}  // namespace arraysep::pipeline
