// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <vector>

#include "arraysep/sim/geometry.h"

namespace arraysep::sim {

struct RirOptions {
  double sample_rate = 16000.0;
  double sound_speed = 343.0;
  // Maximum image order; negative means every image that arrives within
  // `length` samples.
  int max_order = 6;
  // RIR length in samples. Zero selects ceil(t60 * fs), trimmed to the last
  // image arrival when max_order bounds the image set.
  std::size_t length = 0;
  // Second-order high-pass applied to every response; 0 disables. With all
  // reflection coefficients positive the images pile up a DC component that
  // otherwise dominates the late tail.
  double highpass_hz = 100.0;
};

// Uniform wall reflection coefficient whose image-method energy decay has
// the requested T60 (T30 slope of the Schroeder curve, extrapolated). A
// shoebox decays slower than Sabine or Eyring predict: late energy travels
// along the long axis and meets fewer walls.
double reflection_coefficient(const Point3& room_dims_m, double t60_s,
                              double sound_speed = 343.0);

// Image-source impulse responses from source_pos to every mic of geometry
// (absolute room coordinates). Each image contributes beta^order / (4 pi d)
// through a Hann-windowed sinc fractional delay; taps before t = 0 are
// dropped, so responses are causal.
std::vector<std::vector<double>> simulate_rir(const Point3& room_dims_m,
                                              const Point3& source_pos,
                                              const ArrayGeometry& geometry,
                                              double t60_s,
                                              const RirOptions& options = {});

// Full linear convolution.
std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& kernel);

}  // namespace arraysep::sim
