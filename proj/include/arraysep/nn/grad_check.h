// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "arraysep/nn/tensor.h"

namespace arraysep::nn {

struct GradCheckOptions {
  double eps = 1e-5;
  std::uint64_t seed = 7;
  // Coordinates probed per tensor; 0 probes all of them. Sampled coordinates
  // are drawn without replacement from the seeded generator.
  std::size_t max_coords_per_tensor = 0;
  // Lower bound on the denominator so that gradients that are zero up to
  // rounding do not report a relative error of order one.
  double norm_floor = 1e-6;
};

struct GradCheckResult {
  // ||g_auto - g_fd|| / max(||g_auto||, ||g_fd||) per checked tensor.
  std::vector<double> per_tensor;
  double max_error = 0.0;
  std::size_t evaluations = 0;
};

// Compares reverse-mode gradients of a random projection sum_i w_i f()_i
// against central differences on every element of `wrt`. Each tensor in
// `wrt` must be a leaf that requires gradients; f is re-evaluated with the
// leaf values perturbed in place.
GradCheckResult grad_check(const std::function<Tensor<double>()>& f,
                           const std::vector<Tensor<double>>& wrt,
                           const GradCheckOptions& options = {});

}  // namespace arraysep::nn
