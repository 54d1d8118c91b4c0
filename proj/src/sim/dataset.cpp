// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/sim/dataset.h"

#include <random>
#include <stdexcept>

namespace arraysep::sim {

std::vector<MixtureScene> synth_dataset(const DatasetSpec& spec) {
  if (spec.num_scenes == 0) throw std::invalid_argument("dataset: num_scenes must be >= 1");
  if (spec.num_speakers == 0) throw std::invalid_argument("dataset: num_speakers must be >= 1");
  if (!(spec.duration_s > 0.0)) throw std::invalid_argument("dataset: duration_s must be > 0");
  const ArrayGeometry geometry = geometry_from_label(spec.geometry);
  std::mt19937_64 master(spec.seed);
  std::vector<MixtureScene> scenes;
  scenes.reserve(spec.num_scenes);
  for (std::size_t i = 0; i < spec.num_scenes; ++i) {
    std::vector<dsp::Waveform> sources;
    for (std::size_t k = 0; k < spec.num_speakers; ++k) {
      sources.push_back(speech_like_source(spec.duration_s, spec.sample_rate, master()));
    }
    const std::uint64_t scene_seed = master();
    scenes.push_back(synth_scene(sources, geometry, spec.params, scene_seed));
  }
  return scenes;
}

}  // namespace arraysep::sim
