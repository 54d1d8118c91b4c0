// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "arraysep/cli/run_config.h"

// Subcommand bodies. Each returns a process exit code (0 ok, 1 failure) and
// throws std::invalid_argument for bad usage, which the entry point maps to 2.
namespace arraysep::cli {

// Synthesizes the dataset described by the config: float32 WAVs under
// <out_dir>/scenes and a manifest.
int cmd_synth(const RunConfig& config, std::ostream& out);

// Trains on the manifest when it exists, otherwise on scenes synthesized in
// memory from the dataset keys. Writes the checkpoint and the training log.
int cmd_train(const RunConfig& config, std::ostream& out);

struct SeparateOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path out_dir;
  // Input channel used as the reference. The channels are rotated so that
  // it comes first, which keeps the array's neighbour order.
  std::size_t reference_channel = 0;
};

// Writes <stem>_s<k>.wav (mono float32, input length) for every speaker.
// Returns the written paths through `written` when not null.
int cmd_separate(const SeparateOptions& options, std::ostream& out,
                 std::vector<std::filesystem::path>* written = nullptr);

struct EvalOptions {
  std::filesystem::path checkpoint;  // ignored in oracle mode
  std::filesystem::path manifest;
  // Scores the targets themselves as estimates: the SI-SDRi ceiling.
  bool oracle = false;
  std::size_t workers = 1;
};

struct EvalRow {
  std::string id;
  double si_sdr = 0.0;   // mean over speakers, best permutation
  double si_sdri = 0.0;  // mean over speakers
};

// Per-scene and mean SI-SDR / SI-SDRi as a text table.
int cmd_eval(const EvalOptions& options, std::ostream& out, std::vector<EvalRow>* rows = nullptr);

struct VerifyOptions {
  bool include_training = true;
  std::filesystem::path training_log;  // empty: none
};

// Runs the acceptance suite; 1 when any check fails.
int cmd_verify(const VerifyOptions& options, std::ostream& out);

// Rotates channels so that `first` becomes channel 0.
dsp::Waveform rotate_channels(const dsp::Waveform& wave, std::size_t first);

}  // namespace arraysep::cli
