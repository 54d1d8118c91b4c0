// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arraysep/nn/layers.h"

// Hierarchical dual-path encoder/decoder over a [T, F, E] feature map.
//
//   encoder level l : merge_l (conv, kernel = stride = P_l, then LN) -> DP_l
//   bottleneck      : DP
//   decoder level l : expand_l (transposed conv, LN, crop, + skip_l) -> DP'_l
//   head            : Linear(E, 2K)
//
// The grid is zero-padded at the bottom/right before the first merge with
// P > 1 so that every later merge divides evenly; the mirrored expand crops
// the padding away again.
namespace arraysep::separator {

struct SeparatorConfig {
  std::size_t input_dim = 8;                         // E
  std::vector<std::size_t> merge_windows{1, 2, 2};   // P_l
  std::vector<std::size_t> level_dims{8, 16, 32};    // E_l
  std::size_t num_speakers = 2;                      // K
  nn::ConformerConfig conformer;                     // model_dim is set per level
  bool skip_connections = true;
  bool bottleneck_block = true;
  bool decoder_dual_path = true;

  void validate() const;
  std::size_t total_factor() const;
  nn::ConformerConfig conformer_for(std::size_t dim) const;
};

// Conformer along time for every frequency index, then along frequency for
// every time index. [T, F, D] -> [T, F, D].
template <typename Real>
class DualPathBlock {
 public:
  DualPathBlock() = default;
  DualPathBlock(const nn::ConformerConfig& config, nn::Rng& rng);

  // `tag` prefixes the attention labels ("<tag>.time", "<tag>.freq").
  nn::Tensor<Real> operator()(const nn::Tensor<Real>& x, const std::string& tag = "dp") const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  std::vector<nn::ConformerBlock<Real>> time_layers;
  std::vector<nn::ConformerBlock<Real>> freq_layers;
};

template <typename Real>
class PatchMerge {
 public:
  PatchMerge() = default;
  PatchMerge(std::size_t in, std::size_t out, std::size_t window, nn::Rng& rng);
  // Input dims must be multiples of the window.
  nn::Tensor<Real> operator()(const nn::Tensor<Real>& x) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  nn::Conv2d<Real> conv;
  nn::LayerNorm<Real> norm;
  std::size_t window = 1;
};

template <typename Real>
class PatchExpand {
 public:
  PatchExpand() = default;
  PatchExpand(std::size_t in, std::size_t out, std::size_t window, nn::Rng& rng);
  // Upsamples by the window, normalizes, crops to rows x cols and adds the
  // skip tensor when it is defined (its shape must be [rows, cols, out]).
  nn::Tensor<Real> operator()(const nn::Tensor<Real>& x, std::size_t rows, std::size_t cols,
                              const nn::Tensor<Real>& skip) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  nn::ConvTranspose2d<Real> deconv;
  nn::LayerNorm<Real> norm;
  std::size_t window = 1;
};

template <typename Real>
class Separator {
 public:
  Separator() = default;
  Separator(const SeparatorConfig& config, nn::Rng& rng);

  // [T, F, E] -> [T, F, 2K] with channel 2k = real, 2k + 1 = imaginary part
  // of speaker k.
  nn::Tensor<Real> operator()(const nn::Tensor<Real>& features) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;

  const SeparatorConfig& config() const { return config_; }

  std::vector<PatchMerge<Real>> merges;
  std::vector<DualPathBlock<Real>> encoder_blocks;
  DualPathBlock<Real> bottleneck;
  std::vector<PatchExpand<Real>> expands;
  std::vector<DualPathBlock<Real>> decoder_blocks;
  nn::Linear<Real> head;

 private:
  SeparatorConfig config_;
};

// Grid of encoder level l for an input of rows x cols: the padded, merged
// size the dual-path block at that level sees.
struct LevelGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t padded_rows = 0;  // before this level's merge
  std::size_t padded_cols = 0;
};
std::vector<LevelGrid> level_grids(const SeparatorConfig& config, std::size_t rows, std::size_t cols);

extern template class DualPathBlock<float>;
extern template class DualPathBlock<double>;
extern template class PatchMerge<float>;
extern template class PatchMerge<double>;
extern template class PatchExpand<float>;
extern template class PatchExpand<double>;
extern template class Separator<float>;
extern template class Separator<double>;

}  // namespace arraysep::separator
