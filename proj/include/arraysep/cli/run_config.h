// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "arraysep/pipeline/model.h"
#include "arraysep/sim/dataset.h"
#include "arraysep/train/trainer.h"

// Plain-text run configuration shared by every subcommand. One `key=value`
// per line, `#` starts a comment. Unknown keys are rejected.
namespace arraysep::cli {

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

struct RunConfig {
  pipeline::ModelConfig model = pipeline::ModelConfig::toy();
  sim::DatasetSpec dataset;
  train::TrainConfig train;
  std::filesystem::path out_dir = "arraysep_out";
  std::filesystem::path manifest;    // empty: <out_dir>/manifest.txt
  std::filesystem::path checkpoint;  // empty: <out_dir>/model.ckpt
  std::filesystem::path log;         // empty: <out_dir>/train_log.jsonl
  std::size_t workers = 1;

  // Throws std::invalid_argument for an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  // Applies `scale` first (it resets the model section), then the rest in
  // order.
  void apply(const std::vector<std::pair<std::string, std::string>>& entries);

  std::filesystem::path manifest_path() const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path log_path() const;

  // Every accepted key with its default, for --help.
  static std::vector<ConfigKey> documented_keys();
};

// "key=value" -> pair; throws std::invalid_argument without '='.
std::pair<std::string, std::string> split_assignment(const std::string& text);

// Parses a config file body; line numbers appear in error messages.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

}  // namespace arraysep::cli
