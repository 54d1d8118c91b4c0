// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/fusion/fusion.h"

#include <algorithm>
#include <stdexcept>

namespace arraysep::fusion {

void FusionConfig::validate() const {
  if (embed_dim == 0) throw std::invalid_argument("fusion: embed_dim must be >= 1");
  if (extractor_kernel % 2 == 0) {
    throw std::invalid_argument("fusion: extractor kernel must be odd, got " +
                                std::to_string(extractor_kernel));
  }
  // Anything but stride 1 would change the T x F grid the fusion relies on.
  if (extractor_stride != 1) {
    throw std::invalid_argument("fusion: only extractor stride 1 is supported");
  }
  if (aff_bottleneck_ratio == 0 || aff_iterations == 0) {
    throw std::invalid_argument("fusion: bottleneck ratio and iteration count must be >= 1");
  }
}

template <typename Real>
nn::Tensor<Real> reference_planes(const dsp::ComplexSpectrogram& spec, std::size_t channel) {
  if (channel >= spec.channels) {
    throw std::out_of_range("reference channel " + std::to_string(channel) + " not in a " +
                            std::to_string(spec.channels) + "-channel spectrogram");
  }
  std::vector<Real> v(spec.frames * spec.bins * 2);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) {
      const dsp::Complex z = spec.at(t, f, channel);
      const std::size_t i = (t * spec.bins + f) * 2;
      v[i] = static_cast<Real>(z.real());
      v[i + 1] = static_cast<Real>(z.imag());
    }
  }
  return nn::Tensor<Real>({spec.frames, spec.bins, 2}, std::move(v));
}

template <typename Real>
nn::Tensor<Real> all_planes(const dsp::ComplexSpectrogram& spec) {
  std::vector<Real> v(spec.data.size() * 2);
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    v[2 * i] = static_cast<Real>(spec.data[i].real());
    v[2 * i + 1] = static_cast<Real>(spec.data[i].imag());
  }
  return nn::Tensor<Real>({spec.frames, spec.bins, 2 * spec.channels}, std::move(v));
}

template <typename Real>
LocalPatternExtractor<Real>::LocalPatternExtractor(const FusionConfig& config, nn::Rng& rng)
    : reference_channel(config.reference_channel) {
  config.validate();
  const std::size_t k = config.extractor_kernel;
  conv1 = nn::Conv2d<Real>(2, config.embed_dim, k, 1, k / 2, rng);
  conv2 = nn::Conv2d<Real>(config.embed_dim, config.embed_dim, k, 1, k / 2, rng);
}

template <typename Real>
nn::Tensor<Real> LocalPatternExtractor<Real>::operator()(const nn::Tensor<Real>& planes) const {
  return conv2(nn::relu(conv1(planes)));
}

template <typename Real>
nn::Tensor<Real> LocalPatternExtractor<Real>::operator()(const dsp::ComplexSpectrogram& spec) const {
  return (*this)(reference_planes<Real>(spec, reference_channel));
}

template <typename Real>
void LocalPatternExtractor<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  conv1.collect(set, prefix + ".conv1");
  conv2.collect(set, prefix + ".conv2");
}

template <typename Real>
Bottleneck<Real>::Bottleneck(std::size_t dim, std::size_t ratio, nn::Rng& rng) {
  const std::size_t hidden = std::max<std::size_t>(1, dim / ratio);
  reduce = nn::Linear<Real>(dim, hidden, rng);
  expand = nn::Linear<Real>(hidden, dim, rng);
}

template <typename Real>
void Bottleneck<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  reduce.collect(set, prefix + ".reduce");
  expand.collect(set, prefix + ".expand");
}

template <typename Real>
ChannelAttention<Real>::ChannelAttention(std::size_t dim, std::size_t ratio, nn::Rng& rng)
    : local(dim, ratio, rng), global(dim, ratio, rng) {}

template <typename Real>
nn::Tensor<Real> ChannelAttention<Real>::operator()(const nn::Tensor<Real>& u) const {
  return nn::sigmoid(nn::add_last(local(u), global(nn::global_avg_pool(u))));
}

template <typename Real>
void ChannelAttention<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  local.collect(set, prefix + ".local");
  global.collect(set, prefix + ".global");
}

template <typename Real>
AttentionalFusion<Real>::AttentionalFusion(const FusionConfig& config, nn::Rng& rng) {
  config.validate();
  for (std::size_t i = 0; i < config.aff_iterations; ++i) {
    stages.emplace_back(config.embed_dim, config.aff_bottleneck_ratio, rng);
  }
}

template <typename Real>
nn::Tensor<Real> AttentionalFusion<Real>::operator()(const nn::Tensor<Real>& spectral,
                                                     const nn::Tensor<Real>& spatial) const {
  return fuse(spectral, spatial, nullptr);
}

template <typename Real>
nn::Tensor<Real> AttentionalFusion<Real>::fuse(const nn::Tensor<Real>& spectral,
                                               const nn::Tensor<Real>& spatial,
                                               std::vector<nn::Tensor<Real>>* masks) const {
  if (spectral.shape() != spatial.shape()) {
    throw std::invalid_argument("fusion: spectral " + nn::to_string(spectral.shape()) +
                                " and spatial " + nn::to_string(spatial.shape()) + " differ");
  }
  nn::Tensor<Real> z = nn::add(spectral, spatial);
  for (const auto& stage : stages) {
    const nn::Tensor<Real> m = stage(z);
    if (masks) masks->push_back(m);
    z = nn::blend(m, spectral, spatial);
  }
  return z;
}

template <typename Real>
void AttentionalFusion<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    stages[i].collect(set, prefix + ".stage" + std::to_string(i));
  }
}

template nn::Tensor<float> reference_planes<float>(const dsp::ComplexSpectrogram&, std::size_t);
template nn::Tensor<double> reference_planes<double>(const dsp::ComplexSpectrogram&, std::size_t);
template nn::Tensor<float> all_planes<float>(const dsp::ComplexSpectrogram&);
template nn::Tensor<double> all_planes<double>(const dsp::ComplexSpectrogram&);
template class LocalPatternExtractor<float>;
template class LocalPatternExtractor<double>;
template class Bottleneck<float>;
template class Bottleneck<double>;
template class ChannelAttention<float>;
template class ChannelAttention<double>;
template class AttentionalFusion<float>;
template class AttentionalFusion<double>;

}  // namespace arraysep::fusion
