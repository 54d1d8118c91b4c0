// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "arraysep/dsp/stft.h"
#include "arraysep/train/metrics.h"

// Reference computations written independently of the library code paths
// they are compared against. They favour directness over speed.
namespace arraysep::verify {

struct VmeOracle {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> counts;
  std::vector<double> alphas;  // layout order
};

// Direct evaluation of the per-pair distribution rule with 1-based pair
// indices: n_i = floor(Nv / Np) + [i <= Nv mod Np].
VmeOracle vme_oracle(std::size_t real_channels, std::size_t max_channels);

// Counts analysis frames by walking frame starts over the reflect-padded
// signal.
std::size_t frame_count_oracle(std::size_t num_samples, const dsp::StftConfig& config);

// |<d, x>|^2 / (|d|^2 |x|^2) in std::complex arithmetic.
double sdl_projection_oracle(const std::vector<std::complex<double>>& d,
                             const std::vector<std::complex<double>>& x, bool hermitian);

// Exhaustive permutation search by recursion (no std::next_permutation).
// Ties keep the first permutation in lexicographic order.
train::UpitResult upit_oracle(const std::vector<std::vector<double>>& estimates,
                              const std::vector<std::vector<double>>& references,
                              double clamp_db = train::kDefaultClampDb);

}  // namespace arraysep::verify
