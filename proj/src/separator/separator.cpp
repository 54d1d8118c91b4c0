// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/separator/separator.h"

#include <stdexcept>

namespace arraysep::separator {

namespace {

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

}  // namespace

void SeparatorConfig::validate() const {
  if (merge_windows.empty() || merge_windows.size() != level_dims.size()) {
    throw std::invalid_argument("separator: need one level dim per merge window");
  }
  for (auto p : merge_windows) {
    if (p == 0) throw std::invalid_argument("separator: merge window must be >= 1");
  }
  for (auto d : level_dims) conformer_for(d).validate();
  conformer_for(input_dim).validate();
  if (num_speakers == 0) throw std::invalid_argument("separator: num_speakers must be >= 1");
}

std::size_t SeparatorConfig::total_factor() const {
  std::size_t f = 1;
  for (auto p : merge_windows) f *= p;
  return f;
}

nn::ConformerConfig SeparatorConfig::conformer_for(std::size_t dim) const {
  nn::ConformerConfig c = conformer;
  c.model_dim = dim;
  return c;
}

std::vector<LevelGrid> level_grids(const SeparatorConfig& config, std::size_t rows, std::size_t cols) {
  std::vector<LevelGrid> grids;
  const std::size_t levels = config.merge_windows.size();
  for (std::size_t l = 0; l < levels; ++l) {
    std::size_t remaining = 1;
    for (std::size_t j = l; j < levels; ++j) remaining *= config.merge_windows[j];
    LevelGrid g;
    g.padded_rows = rows;
    g.padded_cols = cols;
    const std::size_t p = config.merge_windows[l];
    if (p > 1 && (rows % remaining != 0 || cols % remaining != 0)) {
      g.padded_rows = round_up(rows, remaining);
      g.padded_cols = round_up(cols, remaining);
    }
    g.rows = g.padded_rows / p;
    g.cols = g.padded_cols / p;
    grids.push_back(g);
    rows = g.rows;
    cols = g.cols;
  }
  return grids;
}

template <typename Real>
DualPathBlock<Real>::DualPathBlock(const nn::ConformerConfig& config, nn::Rng& rng) {
  for (std::size_t i = 0; i < config.num_layers_per_path; ++i) {
    time_layers.emplace_back(config, rng);
  }
  for (std::size_t i = 0; i < config.num_layers_per_path; ++i) {
    freq_layers.emplace_back(config, rng);
  }
}

template <typename Real>
nn::Tensor<Real> DualPathBlock<Real>::operator()(const nn::Tensor<Real>& x, const std::string& tag) const {
  if (x.rank() != 3) throw std::invalid_argument("dual-path block expects [T, F, D]");
  // [F, T, D]: one time sequence per frequency index.
  nn::Tensor<Real> h = nn::swap_leading(x);
  {
    nn::AttentionLabel label(tag + ".time");
    for (const auto& layer : time_layers) h = layer(h);
  }
  h = nn::swap_leading(h);
  {
    nn::AttentionLabel label(tag + ".freq");
    for (const auto& layer : freq_layers) h = layer(h);
  }
  return h;
}

template <typename Real>
void DualPathBlock<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  for (std::size_t i = 0; i < time_layers.size(); ++i) {
    time_layers[i].collect(set, prefix + ".time" + std::to_string(i));
  }
  for (std::size_t i = 0; i < freq_layers.size(); ++i) {
    freq_layers[i].collect(set, prefix + ".freq" + std::to_string(i));
  }
}

template <typename Real>
PatchMerge<Real>::PatchMerge(std::size_t in, std::size_t out, std::size_t window_, nn::Rng& rng)
    : conv(in, out, window_, window_, 0, rng), norm(out), window(window_) {}

template <typename Real>
nn::Tensor<Real> PatchMerge<Real>::operator()(const nn::Tensor<Real>& x) const {
  if (x.dim(0) % window != 0 || x.dim(1) % window != 0) {
    throw std::invalid_argument("patch merge: grid " + nn::to_string(x.shape()) +
                                " is not a multiple of window " + std::to_string(window));
  }
  return norm(conv(x));
}

template <typename Real>
void PatchMerge<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  conv.collect(set, prefix + ".conv");
  norm.collect(set, prefix + ".norm");
}

template <typename Real>
PatchExpand<Real>::PatchExpand(std::size_t in, std::size_t out, std::size_t window_, nn::Rng& rng)
    : deconv(in, out, window_, window_, rng), norm(out), window(window_) {}

template <typename Real>
nn::Tensor<Real> PatchExpand<Real>::operator()(const nn::Tensor<Real>& x, std::size_t rows,
                                               std::size_t cols, const nn::Tensor<Real>& skip) const {
  nn::Tensor<Real> y = norm(deconv(x));
  if (y.dim(0) != rows || y.dim(1) != cols) y = nn::crop2d(y, rows, cols);
  if (skip.defined()) {
    if (skip.shape() != y.shape()) {
      throw std::invalid_argument("patch expand: skip " + nn::to_string(skip.shape()) +
                                  " does not match " + nn::to_string(y.shape()));
    }
    y = nn::add(y, skip);
  }
  return y;
}

template <typename Real>
void PatchExpand<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  deconv.collect(set, prefix + ".deconv");
  norm.collect(set, prefix + ".norm");
}

template <typename Real>
Separator<Real>::Separator(const SeparatorConfig& config, nn::Rng& rng) : config_(config) {
  config.validate();
  const std::size_t levels = config.merge_windows.size();
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t in = l == 0 ? config.input_dim : config.level_dims[l - 1];
    merges.emplace_back(in, config.level_dims[l], config.merge_windows[l], rng);
    encoder_blocks.emplace_back(config.conformer_for(config.level_dims[l]), rng);
  }
  if (config.bottleneck_block) {
    bottleneck = DualPathBlock<Real>(config.conformer_for(config.level_dims.back()), rng);
  }
  expands.resize(levels);
  decoder_blocks.resize(levels);
  for (std::size_t l = levels; l-- > 0;) {
    const std::size_t out = l == 0 ? config.input_dim : config.level_dims[l - 1];
    expands[l] = PatchExpand<Real>(config.level_dims[l], out, config.merge_windows[l], rng);
    if (config.decoder_dual_path) {
      decoder_blocks[l] = DualPathBlock<Real>(config.conformer_for(out), rng);
    }
  }
  head = nn::Linear<Real>(config.input_dim, 2 * config.num_speakers, rng);
}

template <typename Real>
nn::Tensor<Real> Separator<Real>::operator()(const nn::Tensor<Real>& features) const {
  if (features.rank() != 3 || features.dim(2) != config_.input_dim) {
    throw std::invalid_argument("separator: expected [T, F, " + std::to_string(config_.input_dim) +
                                "], got " + nn::to_string(features.shape()));
  }
  const std::size_t levels = merges.size();
  const auto grids = level_grids(config_, features.dim(0), features.dim(1));

  std::vector<nn::Tensor<Real>> skips(levels);
  nn::Tensor<Real> x = features;
  for (std::size_t l = 0; l < levels; ++l) {
    skips[l] = x;
    const LevelGrid& g = grids[l];
    if (g.padded_rows != x.dim(0) || g.padded_cols != x.dim(1)) {
      x = nn::pad_end2d(x, g.padded_rows, g.padded_cols);
    }
    x = merges[l](x);
    x = encoder_blocks[l](x, "enc" + std::to_string(l));
  }
  if (config_.bottleneck_block) x = bottleneck(x, "bottleneck");
  for (std::size_t l = levels; l-- > 0;) {
    const nn::Tensor<Real>& skip = skips[l];
    x = expands[l](x, skip.dim(0), skip.dim(1),
                   config_.skip_connections ? skip : nn::Tensor<Real>());
    if (config_.decoder_dual_path) x = decoder_blocks[l](x, "dec" + std::to_string(l));
  }
  return head(x);
}

template <typename Real>
void Separator<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  for (std::size_t l = 0; l < merges.size(); ++l) {
    merges[l].collect(set, prefix + ".merge" + std::to_string(l));
    encoder_blocks[l].collect(set, prefix + ".enc" + std::to_string(l));
  }
  if (config_.bottleneck_block) bottleneck.collect(set, prefix + ".bottleneck");
  for (std::size_t l = merges.size(); l-- > 0;) {
    expands[l].collect(set, prefix + ".expand" + std::to_string(l));
    if (config_.decoder_dual_path) decoder_blocks[l].collect(set, prefix + ".dec" + std::to_string(l));
  }
  head.collect(set, prefix + ".head");
}

template class DualPathBlock<float>;
template class DualPathBlock<double>;
template class PatchMerge<float>;
template class PatchMerge<double>;
template class PatchExpand<float>;
template class PatchExpand<double>;
template class Separator<float>;
template class Separator<double>;

}  // namespace arraysep::separator
