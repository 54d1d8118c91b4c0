// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arraysep/sim/scene.h"

namespace arraysep::sim {

// A reproducible set of synthetic scenes: speech-like sources convolved in
// randomly drawn rooms. Everything derives from `seed`.
struct DatasetSpec {
  std::string geometry = "L-2-5";
  std::size_t num_scenes = 3;
  std::size_t num_speakers = 2;
  double duration_s = 2.0;
  int sample_rate = 16000;
  std::uint64_t seed = 100;
  // Unset optional fields are drawn per scene from their valid ranges.
  SceneParams params;
};

std::vector<MixtureScene> synth_dataset(const DatasetSpec& spec);

}  // namespace arraysep::sim
