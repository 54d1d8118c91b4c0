// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/nn/layers.h"

#include <cmath>
#include <stdexcept>

namespace arraysep::nn {

namespace {

template <typename Real>
Tensor<Real> zeros(Shape shape) {
  return Tensor<Real>::parameter(shape, std::vector<Real>(numel(shape), Real(0)));
}

template <typename Real>
Tensor<Real> ones(Shape shape) {
  return Tensor<Real>::parameter(shape, std::vector<Real>(numel(shape), Real(1)));
}

// Uniform in +-1/sqrt(fan_in). Zero biases would leave zero-padded grid
// cells exactly zero, where every LayerNorm divides by sqrt(eps).
template <typename Real>
Tensor<Real> bias_init(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<Real> v(numel(shape));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-bound, bound));
  return Tensor<Real>::parameter(shape, std::move(v));
}

template <typename Real>
void zero_fill(Tensor<Real>& t) {
  if (!t.defined()) return;
  for (auto& v : t.data()) v = Real(0);
}

}  // namespace

template <typename Real>
Linear<Real>::Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
  weight = Tensor<Real>::parameter({in, out}, xavier_uniform<Real>(rng, in, out, in * out));
  if (with_bias) bias = bias_init<Real>({out}, in, rng);
}

template <typename Real>
void Linear<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  set.add(prefix + ".weight", weight);
  if (bias.defined()) set.add(prefix + ".bias", bias);
}

template <typename Real>
LayerNorm<Real>::LayerNorm(std::size_t dim) : gamma(ones<Real>({dim})), beta(zeros<Real>({dim})) {}

template <typename Real>
void LayerNorm<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  set.add(prefix + ".gamma", gamma);
  set.add(prefix + ".beta", beta);
}

template <typename Real>
Conv2d<Real>::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
                     std::size_t pad_, Rng& rng)
    : stride(stride_), pad(pad_) {
  const std::size_t taps = kernel * kernel;
  weight = Tensor<Real>::parameter({kernel, kernel, in, out},
                                   xavier_uniform<Real>(rng, taps * in, taps * out, taps * in * out));
  bias = bias_init<Real>({out}, taps * in, rng);
}

template <typename Real>
void Conv2d<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  set.add(prefix + ".weight", weight);
  set.add(prefix + ".bias", bias);
}

template <typename Real>
ConvTranspose2d<Real>::ConvTranspose2d(std::size_t in, std::size_t out, std::size_t kernel,
                                       std::size_t stride_, Rng& rng)
    : stride(stride_) {
  const std::size_t taps = kernel * kernel;
  weight = Tensor<Real>::parameter({kernel, kernel, in, out},
                                   xavier_uniform<Real>(rng, taps * in, taps * out, taps * in * out));
  bias = bias_init<Real>({out}, taps * in, rng);
}

template <typename Real>
void ConvTranspose2d<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  set.add(prefix + ".weight", weight);
  set.add(prefix + ".bias", bias);
}

void ConformerConfig::validate() const {
  if (model_dim == 0 || num_heads == 0 || model_dim % num_heads != 0) {
    throw std::invalid_argument("conformer: model_dim " + std::to_string(model_dim) +
                                " must be a positive multiple of num_heads " +
                                std::to_string(num_heads));
  }
  if (conv_kernel % 2 == 0) {
    throw std::invalid_argument("conformer: conv_kernel must be odd, got " +
                                std::to_string(conv_kernel));
  }
  if (ff_expansion == 0 || num_layers_per_path == 0) {
    throw std::invalid_argument("conformer: ff_expansion and num_layers_per_path must be >= 1");
  }
}

template <typename Real>
FeedForward<Real>::FeedForward(std::size_t dim, std::size_t expansion, Rng& rng)
    : norm(dim), up(dim, dim * expansion, rng), down(dim * expansion, dim, rng) {}

template <typename Real>
Tensor<Real> FeedForward<Real>::operator()(const Tensor<Real>& x) const {
  return down(swish(up(norm(x))));
}

template <typename Real>
void FeedForward<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  norm.collect(set, prefix + ".norm");
  up.collect(set, prefix + ".up");
  down.collect(set, prefix + ".down");
}

template <typename Real>
SelfAttention<Real>::SelfAttention(std::size_t dim, std::size_t heads_, Rng& rng)
    : norm(dim),
      query(dim, dim, rng),
      key(dim, dim, rng, false),  // a key bias only shifts each query's scores
      value(dim, dim, rng),
      out(dim, dim, rng),
      heads(heads_) {}

template <typename Real>
Tensor<Real> SelfAttention<Real>::operator()(const Tensor<Real>& x) const {
  const Tensor<Real> h = norm(x);
  return out(attention(query(h), key(h), value(h), heads));
}

template <typename Real>
void SelfAttention<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  norm.collect(set, prefix + ".norm");
  query.collect(set, prefix + ".query");
  key.collect(set, prefix + ".key");
  value.collect(set, prefix + ".value");
  out.collect(set, prefix + ".out");
}

template <typename Real>
ConvModule<Real>::ConvModule(std::size_t dim, std::size_t kernel, Rng& rng)
    : norm(dim), pointwise_in(dim, 2 * dim, rng), pointwise_out(dim, dim, rng) {
  depthwise_weight = Tensor<Real>::parameter({kernel, dim}, xavier_uniform<Real>(rng, kernel, kernel, kernel * dim));
  depthwise_bias = bias_init<Real>({dim}, kernel, rng);
}

template <typename Real>
Tensor<Real> ConvModule<Real>::operator()(const Tensor<Real>& x) const {
  Tensor<Real> h = glu(pointwise_in(norm(x)));
  h = swish(depthwise_conv1d(h, depthwise_weight, depthwise_bias));
  return pointwise_out(h);
}

template <typename Real>
void ConvModule<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  norm.collect(set, prefix + ".norm");
  pointwise_in.collect(set, prefix + ".pw_in");
  set.add(prefix + ".dw.weight", depthwise_weight);
  set.add(prefix + ".dw.bias", depthwise_bias);
  pointwise_out.collect(set, prefix + ".pw_out");
}

template <typename Real>
ConformerBlock<Real>::ConformerBlock(const ConformerConfig& config, Rng& rng) {
  config.validate();
  const std::size_t d = config.model_dim;
  ff1 = FeedForward<Real>(d, config.ff_expansion, rng);
  mhsa = SelfAttention<Real>(d, config.num_heads, rng);
  conv = ConvModule<Real>(d, config.conv_kernel, rng);
  ff2 = FeedForward<Real>(d, config.ff_expansion, rng);
  final_norm = LayerNorm<Real>(d);
}

template <typename Real>
Tensor<Real> ConformerBlock<Real>::operator()(const Tensor<Real>& x) const {
  Tensor<Real> h = add(x, affine(ff1(x), 0.5));
  h = add(h, mhsa(h));
  h = add(h, conv(h));
  h = add(h, affine(ff2(h), 0.5));
  return final_norm(h);
}

template <typename Real>
void ConformerBlock<Real>::collect(ParamSet<Real>& set, const std::string& prefix) const {
  ff1.collect(set, prefix + ".ff1");
  mhsa.collect(set, prefix + ".mhsa");
  conv.collect(set, prefix + ".conv");
  ff2.collect(set, prefix + ".ff2");
  final_norm.collect(set, prefix + ".norm");
}

template <typename Real>
void ConformerBlock<Real>::zero_branch_outputs() {
  for (Linear<Real>* l : {&ff1.down, &mhsa.out, &conv.pointwise_out, &ff2.down}) {
    zero_fill(l->weight);
    zero_fill(l->bias);
  }
}

template class Linear<float>;
template class Linear<double>;
template class LayerNorm<float>;
template class LayerNorm<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;
template class FeedForward<float>;
template class FeedForward<double>;
template class SelfAttention<float>;
template class SelfAttention<double>;
template class ConvModule<float>;
template class ConvModule<double>;
template class ConformerBlock<float>;
template class ConformerBlock<double>;

}  // namespace arraysep::nn
