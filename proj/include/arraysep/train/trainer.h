// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "arraysep/pipeline/model.h"
#include "arraysep/sim/scene.h"
#include "arraysep/train/metrics.h"

namespace arraysep::train {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t steps = 500;
  std::size_t batch_size = 1;  // scenes per step, cycled through the set
  std::uint64_t seed = 1;
  double loss_clamp_db = kDefaultClampDb;
  // Global gradient-norm ceiling applied before the optimizer; 0 disables.
  double grad_clip_norm = 5.0;

  void validate() const;
};

// Mixture spectrogram plus reference-channel targets, precomputed once.
struct TrainScene {
  dsp::ComplexSpectrogram mixture;
  std::vector<std::vector<double>> targets;  // K x N
  std::vector<double> mixture_reference;     // N
  std::size_t num_samples = 0;
};

TrainScene make_train_scene(const sim::MixtureScene& scene, const dsp::StftConfig& config);

template <typename Real>
class Adam {
 public:
  Adam(const nn::ParamSet<Real>& params, const TrainConfig& config);
  // Applies one update from the accumulated gradients.
  void step();
  std::uint64_t steps_taken() const { return t_; }

 private:
  nn::ParamSet<Real> params_;
  TrainConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

struct StepResult {
  double loss = 0.0;       // mean uPIT loss over the batch (negative SI-SDR, dB)
  double grad_norm = 0.0;  // global L2 norm before clipping
};

struct SceneScore {
  UpitResult upit;
  double si_sdri_mean = 0.0;
};

// Forward pass of one scene to K waveforms (no gradients).
template <typename Real>
std::vector<std::vector<double>> estimate_waveforms(const pipeline::SeparationModel<Real>& model,
                                                    const TrainScene& scene);

template <typename Real>
SceneScore score_scene(const pipeline::SeparationModel<Real>& model, const TrainScene& scene,
                       double clamp_db = kDefaultClampDb);

template <typename Real>
class Trainer {
 public:
  Trainer(pipeline::SeparationModel<Real>& model, const TrainConfig& config);

  // Accumulates the uPIT SI-SDR loss gradient of every scene in the batch
  // (each scaled by 1 / batch size) and takes one optimizer step. Throws
  // std::runtime_error on a non-finite loss or gradient.
  StepResult step(const std::vector<const TrainScene*>& batch);

  // Scenes used at optimizer step `index` (0-based) under cyclic batching.
  static std::vector<const TrainScene*> batch_for(const std::vector<TrainScene>& scenes,
                                                  std::size_t index, std::size_t batch_size);

  std::uint64_t steps_taken() const { return adam_.steps_taken(); }

 private:
  pipeline::SeparationModel<Real>& model_;
  TrainConfig config_;
  Adam<Real> adam_;
};

// Line-delimited JSON records {"step", "loss", "grad_norm", "wall_time"}.
class TrainingLog {
 public:
  explicit TrainingLog(const std::string& path);
  void write(std::size_t step, double loss, double grad_norm, double wall_time_s);

 private:
  std::ofstream out_;
};

// Mean over scenes of the best-permutation SI-SDR (dB, clamped).
template <typename Real>
double mean_upit_si_sdr(const pipeline::SeparationModel<Real>& model,
                        const std::vector<TrainScene>& scenes, double clamp_db = kDefaultClampDb);

// `steps` optimizer steps with cyclic batches, continuing from the trainer's
// step counter. Each step is written to `log` (if not null) with 1-based
// step numbers and wall time since the call, then passed to `on_step`.
using StepCallback = std::function<void(std::size_t step, const StepResult& result, double wall_s)>;
template <typename Real>
std::vector<StepResult> run_training(Trainer<Real>& trainer, const std::vector<TrainScene>& scenes,
                                     std::size_t steps, std::size_t batch_size, TrainingLog* log,
                                     const StepCallback& on_step = {});

extern template class Adam<float>;
extern template class Adam<double>;
extern template class Trainer<float>;
extern template class Trainer<double>;

}  // namespace arraysep::train
