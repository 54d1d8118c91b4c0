// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>

#include "arraysep/nn/serialize.h"
#include "arraysep/pipeline/model.h"

namespace arraysep::train {

// Parameter container whose fingerprint is the model's architecture text.
template <typename Real>
void save_checkpoint(const std::string& path, const pipeline::SeparationModel<Real>& model,
                     std::uint64_t step);

// Restores parameters into `model` and returns the stored step counter.
// Throws nn::SerializeError when the stored fingerprint differs from the
// model's configuration.
template <typename Real>
std::uint64_t load_checkpoint(const std::string& path, const pipeline::SeparationModel<Real>& model);

// Architecture stored in a checkpoint (seed is not part of it).
pipeline::ModelConfig checkpoint_config(const std::string& path);

}  // namespace arraysep::train
