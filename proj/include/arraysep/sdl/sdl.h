// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arraysep/dsp/stft.h"
#include "arraysep/nn/params.h"
#include "arraysep/nn/tensor.h"

// Learnable spatial dictionary. Each time-frequency bin x(t,f) in C^M is
// compared with every dictionary column d(n) through
//
//   a'_n = |<d(n), x>|^2 / (|d(n)|^2 |x|^2)          in [0, 1]
//   a_n  = x_avg * a'_n,   x_avg = (1/M) sum_i |x_i|
//
// Columns are normalized inside the projection, so the dictionary itself is
// unconstrained during optimization.
namespace arraysep::sdl {

enum class SdlVariant {
  kShared,     // one M x N dictionary for all bins
  kFrequency,  // one M x N dictionary per frequency bin
};

enum class InnerProduct {
  kHermitian,  // sum_m conj(d_m) x_m
  kTranspose,  // sum_m d_m x_m
};

SdlVariant parse_variant(const std::string& text);  // "sdl" | "fsdl"
std::string to_string(SdlVariant v);
InnerProduct parse_inner_product(const std::string& text);  // "hermitian" | "transpose"
std::string to_string(InnerProduct p);

template <typename Real>
struct SpatialDictionary {
  SdlVariant variant = SdlVariant::kShared;
  std::size_t channels = 0;  // M
  std::size_t atoms = 0;     // N
  std::size_t bins = 1;      // F for kFrequency, 1 otherwise
  // [M, N] for kShared, [F, M, N] for kFrequency.
  nn::Tensor<Real> real;
  nn::Tensor<Real> imag;

  // Column n of the dictionary used at frequency bin f.
  std::vector<dsp::Complex> column(std::size_t f, std::size_t n) const;
  void collect(nn::ParamSet<Real>& set, const std::string& prefix) const;
};

// Unit-variance Gaussian real and imaginary parts, then unit-norm columns.
// `bins` is ignored for kShared.
template <typename Real>
SpatialDictionary<Real> init_dictionary(std::size_t channels, std::size_t atoms, SdlVariant variant,
                                        std::size_t bins, nn::Rng& rng);

// x_avg(t, f) for every bin, row-major over (t, f).
std::vector<double> average_magnitude(const dsp::ComplexSpectrogram& spec);

// Returns [T, F, N]. With scale_by_magnitude the result is a, otherwise a'.
// Gradients flow into the dictionary only; the spectrogram is data. Bins with
// x = 0 give a' = 0. Throws when the channel count differs from the
// dictionary or a column is entirely zero.
template <typename Real>
nn::Tensor<Real> spatial_embed(const dsp::ComplexSpectrogram& spec, const SpatialDictionary<Real>& dict,
                               InnerProduct product = InnerProduct::kHermitian,
                               bool scale_by_magnitude = true);

}  // namespace arraysep::sdl
