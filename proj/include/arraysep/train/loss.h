// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <vector>

#include "arraysep/dsp/stft.h"
#include "arraysep/nn/tensor.h"
#include "arraysep/train/metrics.h"

namespace arraysep::train {

// Differentiable inverse STFT of packed spectra [T, F, 2K] -> [K, num_samples].
// Matches dsp::istft sample for sample.
template <typename Real>
nn::Tensor<Real> istft_op(const nn::Tensor<Real>& packed, const dsp::StftConfig& config,
                          std::size_t num_samples);

// -mean_k si_sdr(estimates[k], references[perm[k]]) for estimates [K, N].
// Above +clamp_db the gradient of a term is zero; below -clamp_db the value
// is clamped but the gradient of the unclamped expression is passed through.
template <typename Real>
nn::Tensor<Real> si_sdr_loss(const nn::Tensor<Real>& estimates,
                             const std::vector<std::vector<double>>& references,
                             const std::vector<std::size_t>& perm,
                             double clamp_db = kDefaultClampDb);

// Rows of a [K, N] tensor as double vectors.
template <typename Real>
std::vector<std::vector<double>> rows(const nn::Tensor<Real>& x);

}  // namespace arraysep::train
