// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "arraysep/nn/grad_check.h"
#include "arraysep/pipeline/model.h"

// The acceptance checks, shared by the test binaries and `arraysep verify`.
// Each returns a CheckResult; none of them throws on a failed property.
namespace arraysep::verify {

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// One line: "PASS [n] name: detail (t s)".
std::string format(const CheckResult& result);

// --- gradient cases ----------------------------------------------------------

struct GradCase {
  std::string name;
  double tolerance = 1e-4;
  std::function<nn::GradCheckResult()> run;
};

// Every nn-core kernel on random shapes no larger than 8 x 8 x 8.
std::vector<GradCase> kernel_grad_cases(std::uint64_t seed = 11);
// Spatial dictionary projection, fusion, Conformer parts, separator blocks,
// the differentiable inverse STFT and the SI-SDR loss.
std::vector<GradCase> component_grad_cases(std::uint64_t seed = 12);

// Tiny STFT (16-sample window at 500 Hz, 9 bins) with toy dimensions, so a
// whole model fits a central-difference check.
pipeline::ModelConfig grad_check_model_config();
// Composed model (spectrogram in, separated spectra out) on an 8-frame
// input with `channels` real channels. Probes `coords_per_tensor` entries of
// every parameter tensor.
GradCase end_to_end_grad_case(const pipeline::ModelConfig& config, const std::string& name,
                              std::size_t channels = 2, std::size_t coords_per_tensor = 4);

// --- criteria --------------------------------------------------------------

CheckResult check_vme_plan();                                     // 1
CheckResult check_single_channel_degeneracy();                    // 2
CheckResult check_sdl_invariants();                               // 3
CheckResult check_gradient_suite();                               // 4
CheckResult check_stft_roundtrip(std::size_t num_signals = 100);  // 5
CheckResult check_upit_oracle(std::size_t num_sets = 100);        // 6
CheckResult check_shape_contract(const pipeline::ModelConfig& config);  // 7

struct OverfitOptions {
  std::size_t steps = 500;
  std::size_t num_scenes = 3;
  double duration_s = 2.0;
  std::string geometry = "L-2-5";  // two real channels
  std::uint64_t data_seed = 100;
  std::uint64_t model_seed = 1;
  std::size_t determinism_steps = 3;
  double required_gain_db = 10.0;
  double time_budget_s = 1800.0;
  std::string log_path;  // training log, empty for none
  std::ostream* progress = nullptr;
};

struct OverfitReport {
  double initial_si_sdr_db = 0.0;
  double final_si_sdr_db = 0.0;
  double train_seconds = 0.0;
  bool deterministic = false;
  std::vector<double> losses;
  CheckResult result;
};

OverfitReport run_toy_overfit(const OverfitOptions& options);     // 8
CheckResult check_ablations();                                    // 9
CheckResult check_hierarchy_economy();                            // 10

// Criteria 1-7, 9, 10 and, when `include_training`, criterion 8 (whose
// training log goes to `training_log` unless empty). Results are printed to
// `out` as they complete.
std::vector<CheckResult> run_suite(bool include_training, std::ostream& out,
                                   const std::string& training_log = "");

}  // namespace arraysep::verify
