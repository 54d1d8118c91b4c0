// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arraysep/dsp/stft.h"
#include "arraysep/nn/layers.h"

namespace arraysep::fusion {

struct FusionConfig {
  std::size_t embed_dim = 64;  // E
  std::size_t reference_channel = 0;
  std::size_t extractor_kernel = 5;
  std::size_t extractor_stride = 1;
  std::size_t aff_bottleneck_ratio = 4;
  std::size_t aff_iterations = 2;

  void validate() const;
};

// Real and imaginary planes of one channel as a [T, F, 2] tensor.
template <typename Real>
nn::Tensor<Real> reference_planes(const dsp::ComplexSpectrogram& spec, std::size_t channel);

// Real/imag planes of every channel, [T, F, 2C] ordered (re_0, im_0, re_1, ...).
template <typename Real>
nn::Tensor<Real> all_planes(const dsp::ComplexSpectrogram& spec);

// conv(2 -> E, k) -> ReLU -> conv(E -> E, k), stride 1, same padding.
template <typename Real>
class LocalPatternExtractor {
 public:
  LocalPatternExtractor() = default;
  LocalPatternExtractor(const FusionConfig& config, nn::Rng& rng);

  nn::Tensor<Real> operator()(const nn::Tensor<Real>& planes) const;
  nn::Tensor<Real> operator()(const dsp::ComplexSpectrogram& spec) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  nn::Conv2d<Real> conv1;
  nn::Conv2d<Real> conv2;
  std::size_t reference_channel = 0;
};

// Pointwise bottleneck MLP: Linear(E, E/r) -> ReLU -> Linear(E/r, E).
template <typename Real>
class Bottleneck {
 public:
  Bottleneck() = default;
  Bottleneck(std::size_t dim, std::size_t ratio, nn::Rng& rng);
  nn::Tensor<Real> operator()(const nn::Tensor<Real>& x) const { return expand(nn::relu(reduce(x))); }
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  nn::Linear<Real> reduce;
  nn::Linear<Real> expand;
};

// sigmoid(local(U) + broadcast(global(GAP(U)))), values in (0, 1).
template <typename Real>
class ChannelAttention {
 public:
  ChannelAttention() = default;
  ChannelAttention(std::size_t dim, std::size_t ratio, nn::Rng& rng);
  nn::Tensor<Real> operator()(const nn::Tensor<Real>& u) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  Bottleneck<Real> local;
  Bottleneck<Real> global;
};

// Iterative attentional fusion of a spectral map X and a spatial map Y:
//   Z_1 = m_1 X + (1 - m_1) Y,  m_1 = CA_1(X + Y)
//   Z_i = m_i X + (1 - m_i) Y,  m_i = CA_i(Z_{i-1})
template <typename Real>
class AttentionalFusion {
 public:
  AttentionalFusion() = default;
  AttentionalFusion(const FusionConfig& config, nn::Rng& rng);

  nn::Tensor<Real> operator()(const nn::Tensor<Real>& spectral, const nn::Tensor<Real>& spatial) const;
  // Same as operator() but also returns the mask of every iteration.
  nn::Tensor<Real> fuse(const nn::Tensor<Real>& spectral, const nn::Tensor<Real>& spatial,
                        std::vector<nn::Tensor<Real>>* masks) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  std::vector<ChannelAttention<Real>> stages;
};

extern template class LocalPatternExtractor<float>;
extern template class LocalPatternExtractor<double>;
extern template class Bottleneck<float>;
extern template class Bottleneck<double>;
extern template class ChannelAttention<float>;
extern template class ChannelAttention<double>;
extern template class AttentionalFusion<float>;
extern template class AttentionalFusion<double>;

}  // namespace arraysep::fusion
