// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arraysep/dsp/stft.h"

namespace arraysep::vme {

using Complex = std::complex<double>;

// One virtual microphone between real mics `first` and `second`, at
// fractional position alpha (0 = first, 1 = second).
struct VirtualMic {
  std::size_t pair = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  double alpha = 0.0;
};

// Distribution of M - C virtual mics over the C adjacent pairs
// (0,1), (1,2), ..., (C-1,0). Every pair gets floor(Nv / Np) mics and the
// first Nv mod Np pairs get one more. A single real mic pairs with itself.
struct VmePlan {
  std::size_t real_channels = 0;
  std::size_t max_channels = 0;
  std::size_t num_virtual = 0;
  std::size_t num_pairs = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> counts;
  // In layout order: pairs in index order, alpha ascending within a pair.
  std::vector<VirtualMic> virtual_mics;
};

VmePlan plan_virtual_mics(std::size_t real_channels, std::size_t max_channels);

// Log-linear magnitude and shortest-arc phase interpolation of one bin:
//   |v| = |xi|^(1-alpha) |xj|^alpha,  arg v = arg xi + alpha wrap(arg xj - arg xi)
// alpha = 0 and alpha = 1 return the endpoints unchanged, equal inputs are
// returned unchanged, and a zero-magnitude input yields zero.
Complex interpolate_bin(Complex xi, Complex xj, double alpha);

void interpolate_virtual(std::span<const Complex> xi, std::span<const Complex> xj,
                         double alpha, std::span<Complex> out);

enum class AugmentMode { kVme, kZeroPad };

AugmentMode parse_augment_mode(const std::string& text);
std::string to_string(AugmentMode mode);

// Lifts a T x F x C spectrogram to exactly M channels. Channels 0..C-1 are
// copied bit-exactly; channels C..M-1 are virtual mics in plan order (kVme)
// or zeros (kZeroPad).
dsp::ComplexSpectrogram augment_channels(const dsp::ComplexSpectrogram& spec,
                                         std::size_t max_channels,
                                         AugmentMode mode);

}  // namespace arraysep::vme
