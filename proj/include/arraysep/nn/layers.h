// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>

#include "arraysep/nn/ops.h"
#include "arraysep/nn/params.h"

namespace arraysep::nn {

// Every layer exposes its tensors through collect(set, prefix); names are
// prefix + "." + local name.

template <typename Real>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, bool bias = true);

  Tensor<Real> operator()(const Tensor<Real>& x) const { return linear(x, weight, bias); }
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  Tensor<Real> weight;  // [in, out]
  Tensor<Real> bias;    // [out], may be undefined
};

template <typename Real>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::size_t dim);

  Tensor<Real> operator()(const Tensor<Real>& x) const { return layer_norm(x, gamma, beta); }
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  Tensor<Real> gamma;
  Tensor<Real> beta;
};

template <typename Real>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
         std::size_t pad, Rng& rng);

  Tensor<Real> operator()(const Tensor<Real>& x) const {
    return conv2d(x, weight, bias, stride, pad);
  }
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  Tensor<Real> weight;  // [k, k, in, out]
  Tensor<Real> bias;
  std::size_t stride = 1;
  std::size_t pad = 0;
};

template <typename Real>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, Rng& rng);

  Tensor<Real> operator()(const Tensor<Real>& x) const {
    return conv_transpose2d(x, weight, bias, stride);
  }
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  Tensor<Real> weight;  // [k, k, in, out]
  Tensor<Real> bias;
  std::size_t stride = 1;
};

struct ConformerConfig {
  std::size_t model_dim = 8;
  std::size_t num_heads = 4;
  std::size_t ff_expansion = 4;
  std::size_t conv_kernel = 7;
  std::size_t num_layers_per_path = 1;

  void validate() const;
};

// LN -> Linear(D, eD) -> swish -> Linear(eD, D)
template <typename Real>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(std::size_t dim, std::size_t expansion, Rng& rng);
  Tensor<Real> operator()(const Tensor<Real>& x) const;
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  LayerNorm<Real> norm;
  Linear<Real> up;
  Linear<Real> down;
};

// LN -> q/k/v projections -> attention -> output projection. Input [B, L, D].
// The key projection has no bias.
template <typename Real>
class SelfAttention {
 public:
  SelfAttention() = default;
  SelfAttention(std::size_t dim, std::size_t heads, Rng& rng);
  Tensor<Real> operator()(const Tensor<Real>& x) const;
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  LayerNorm<Real> norm;
  Linear<Real> query, key, value, out;
  std::size_t heads = 1;
};

// LN -> pointwise D->2D -> GLU -> depthwise(k) -> swish -> pointwise D->D
template <typename Real>
class ConvModule {
 public:
  ConvModule() = default;
  ConvModule(std::size_t dim, std::size_t kernel, Rng& rng);
  Tensor<Real> operator()(const Tensor<Real>& x) const;
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  LayerNorm<Real> norm;
  Linear<Real> pointwise_in;
  Tensor<Real> depthwise_weight;  // [k, D]
  Tensor<Real> depthwise_bias;
  Linear<Real> pointwise_out;
};

// Pre-norm Conformer layer on [B, L, D]:
//   x += FF(x) / 2; x += MHSA(x); x += Conv(x); x += FF(x) / 2; x = LN(x)
template <typename Real>
class ConformerBlock {
 public:
  ConformerBlock() = default;
  ConformerBlock(const ConformerConfig& config, Rng& rng);
  Tensor<Real> operator()(const Tensor<Real>& x) const;
  void collect(ParamSet<Real>& set, const std::string& prefix) const;

  // Zeroes the last projection of every residual branch, leaving LN(x).
  void zero_branch_outputs();

  FeedForward<Real> ff1;
  SelfAttention<Real> mhsa;
  ConvModule<Real> conv;
  FeedForward<Real> ff2;
  LayerNorm<Real> final_norm;
};

extern template class Linear<float>;
extern template class Linear<double>;
extern template class LayerNorm<float>;
extern template class LayerNorm<double>;
extern template class Conv2d<float>;
extern template class Conv2d<double>;
extern template class ConvTranspose2d<float>;
extern template class ConvTranspose2d<double>;
extern template class FeedForward<float>;
extern template class FeedForward<double>;
extern template class SelfAttention<float>;
extern template class SelfAttention<double>;
extern template class ConvModule<float>;
extern template class ConvModule<double>;
extern template class ConformerBlock<float>;
extern template class ConformerBlock<double>;

}  // namespace arraysep::nn
