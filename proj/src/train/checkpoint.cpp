// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/train/checkpoint.h"

namespace arraysep::train {

template <typename Real>
void save_checkpoint(const std::string& path, const pipeline::SeparationModel<Real>& model,
                     std::uint64_t step) {
  nn::ParamContainer c;
  c.fingerprint = model.config().fingerprint();
  c.step = step;
  c.records = nn::to_records(model.params());
  nn::write_container(path, c);
}

template <typename Real>
std::uint64_t load_checkpoint(const std::string& path, const pipeline::SeparationModel<Real>& model) {
  const nn::ParamContainer c = nn::read_container(path);
  if (c.fingerprint != model.config().fingerprint()) {
    throw nn::SerializeError("checkpoint " + path +
                             " was written for a different model configuration");
  }
  nn::load_records(model.params(), c.records);
  return c.step;
}

pipeline::ModelConfig checkpoint_config(const std::string& path) {
  return pipeline::ModelConfig::from_fingerprint(nn::read_container(path).fingerprint);
}

template void save_checkpoint<float>(const std::string&, const pipeline::SeparationModel<float>&, std::uint64_t);
template void save_checkpoint<double>(const std::string&, const pipeline::SeparationModel<double>&, std::uint64_t);
template std::uint64_t load_checkpoint<float>(const std::string&, const pipeline::SeparationModel<float>&);
template std::uint64_t load_checkpoint<double>(const std::string&, const pipeline::SeparationModel<double>&);

}  // namespace arraysep::train
