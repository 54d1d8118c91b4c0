// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arraysep/nn/tensor.h"

// Differentiable kernels. Feature maps are channel-last: a time-frequency map
// is [T, F, C] and a batch of sequences is [B, L, D]. Every op accepts float
// or double tensors.
namespace arraysep::nn {

// --- elementwise -----------------------------------------------------------
template <typename Real> Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real> Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b);
// scale * a + shift
template <typename Real> Tensor<Real> affine(const Tensor<Real>& a, double scale, double shift = 0.0);
// a + b where b holds a.shape().back() values broadcast over the leading axes.
template <typename Real> Tensor<Real> add_last(const Tensor<Real>& a, const Tensor<Real>& b);
// gate * a + (1 - gate) * b
template <typename Real> Tensor<Real> blend(const Tensor<Real>& gate, const Tensor<Real>& a, const Tensor<Real>& b);

template <typename Real> Tensor<Real> relu(const Tensor<Real>& x);
template <typename Real> Tensor<Real> sigmoid(const Tensor<Real>& x);
template <typename Real> Tensor<Real> swish(const Tensor<Real>& x);
// Splits the last axis in halves [a, g] and returns a * sigmoid(g).
template <typename Real> Tensor<Real> glu(const Tensor<Real>& x);

// --- dense -------------------------------------------------------------------
// x: [..., in], weight: [in, out], bias: [out] or undefined.
template <typename Real> Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias);
// Normalizes over the last axis, then applies gamma/beta of that size.
template <typename Real> Tensor<Real> layer_norm(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta, double eps = 1e-5);

// --- convolution -----------------------------------------------------------
// x: [H, W, Cin], weight: [KH, KW, Cin, Cout], bias: [Cout] or undefined.
// Output rows: (H + 2 pad - KH) / stride + 1, likewise for columns.
template <typename Real> Tensor<Real> conv2d(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias, std::size_t stride, std::size_t pad);
// Transposed convolution without padding: output (H - 1) stride + KH rows.
template <typename Real> Tensor<Real> conv_transpose2d(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias, std::size_t stride);
// x: [B, L, D], weight: [K, D] with K odd, zero "same" padding.
template <typename Real> Tensor<Real> depthwise_conv1d(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias);

// --- attention ---------------------------------------------------------------
// Scaled dot-product attention of already projected q, k, v: [B, L, D], with
// D split into `heads` contiguous groups.
template <typename Real> Tensor<Real> attention(const Tensor<Real>& q, const Tensor<Real>& k, const Tensor<Real>& v, std::size_t heads);

// Instrumentation of attention calls on the current thread. While a counter
// is installed every attention() call appends a record tagged with the
// innermost AttentionLabel.
struct AttentionRecord {
  std::string label;
  std::size_t batch = 0;
  std::size_t heads = 0;
  std::size_t length = 0;
  // batch * heads * length^2
  std::size_t score_entries() const { return batch * heads * length * length; }
  // heads * length^2, the score matrix of one sequence
  std::size_t entries_per_sequence() const { return heads * length * length; }
};

class AttentionCounter {
 public:
  AttentionCounter();
  ~AttentionCounter();
  AttentionCounter(const AttentionCounter&) = delete;
  AttentionCounter& operator=(const AttentionCounter&) = delete;

  const std::vector<AttentionRecord>& records() const { return records_; }
  void add(AttentionRecord record) { records_.push_back(std::move(record)); }
  static AttentionCounter* current();

 private:
  std::vector<AttentionRecord> records_;
  AttentionCounter* previous_;
};

class AttentionLabel {
 public:
  explicit AttentionLabel(std::string label);
  ~AttentionLabel();
  AttentionLabel(const AttentionLabel&) = delete;
  AttentionLabel& operator=(const AttentionLabel&) = delete;
  static const std::string& current();

 private:
  std::string previous_;
};

// --- layout ----------------------------------------------------------------
// [A, B, ...] -> [B, A, ...]
template <typename Real> Tensor<Real> swap_leading(const Tensor<Real>& x);
// Zero-pads [H, W, C] at the bottom/right to [rows, cols, C].
template <typename Real> Tensor<Real> pad_end2d(const Tensor<Real>& x, std::size_t rows, std::size_t cols);
// Keeps the top-left [rows, cols, C] block.
template <typename Real> Tensor<Real> crop2d(const Tensor<Real>& x, std::size_t rows, std::size_t cols);
template <typename Real> Tensor<Real> reshape(const Tensor<Real>& x, Shape shape);
template <typename Real> Tensor<Real> concat_last(const std::vector<Tensor<Real>>& parts);
template <typename Real> Tensor<Real> slice_last(const Tensor<Real>& x, std::size_t begin, std::size_t end);

// --- reductions --------------------------------------------------------------
// [H, W, E] -> [1, 1, E]
template <typename Real> Tensor<Real> global_avg_pool(const Tensor<Real>& x);
template <typename Real> Tensor<Real> sum(const Tensor<Real>& x);
template <typename Real> Tensor<Real> mean(const Tensor<Real>& x);
// sum_i weights[i] * x[i]
template <typename Real> Tensor<Real> weighted_sum(const Tensor<Real>& x, const std::vector<Real>& weights);

}  // namespace arraysep::nn
