// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/train/trainer.h"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "arraysep/train/loss.h"

namespace arraysep::train {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (steps == 0) throw std::invalid_argument("train: steps must be >= 1");
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train: betas must lie in [0, 1)");
  }
  if (!(loss_clamp_db > 0.0)) throw std::invalid_argument("train: loss_clamp_db must be > 0");
  if (!(grad_clip_norm >= 0.0)) throw std::invalid_argument("train: grad_clip_norm must be >= 0");
}

TrainScene make_train_scene(const sim::MixtureScene& scene, const dsp::StftConfig& config) {
  TrainScene ts;
  ts.mixture = dsp::stft(scene.mixture, config);
  ts.num_samples = scene.mixture.num_samples();
  for (const auto& t : scene.targets) ts.targets.push_back(t.channels.at(0));
  ts.mixture_reference = scene.mixture.channels.at(0);
  return ts;
}

template <typename Real>
Adam<Real>::Adam(const nn::ParamSet<Real>& params, const TrainConfig& config)
    : params_(params), config_(config) {
  for (const auto& e : params_.entries()) {
    m_.emplace_back(e.tensor.numel(), 0.0);
    v_.emplace_back(e.tensor.numel(), 0.0);
  }
}

template <typename Real>
void Adam<Real>::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    nn::Tensor<Real> t = params_.entries()[p].tensor;
    if (!t.has_grad()) continue;
    auto value = t.data();
    auto grad = t.grad();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = static_cast<double>(grad[i]);
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double update = config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.adam_eps);
      value[i] = static_cast<Real>(static_cast<double>(value[i]) - update);
    }
  }
}

template <typename Real>
std::vector<std::vector<double>> estimate_waveforms(const pipeline::SeparationModel<Real>& model,
                                                    const TrainScene& scene) {
  nn::NoGradGuard no_grad;
  const nn::Tensor<Real> spec = model.forward(scene.mixture);
  return rows(istft_op(spec, model.config().stft, scene.num_samples));
}

template <typename Real>
SceneScore score_scene(const pipeline::SeparationModel<Real>& model, const TrainScene& scene,
                       double clamp_db) {
  const auto est = estimate_waveforms(model, scene);
  SceneScore s;
  s.upit = upit_loss(est, scene.targets, clamp_db);
  double total = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    total += si_sdri(est[k], scene.targets[s.upit.perm[k]], scene.mixture_reference, clamp_db);
  }
  s.si_sdri_mean = total / static_cast<double>(est.size());
  return s;
}

template <typename Real>
Trainer<Real>::Trainer(pipeline::SeparationModel<Real>& model, const TrainConfig& config)
    : model_(model), config_(config), adam_(model.params(), config) {
  config_.validate();
}

template <typename Real>
std::vector<const TrainScene*> Trainer<Real>::batch_for(const std::vector<TrainScene>& scenes,
                                                        std::size_t index, std::size_t batch_size) {
  if (scenes.empty()) throw std::invalid_argument("train: no scenes");
  std::vector<const TrainScene*> batch;
  const std::size_t n = std::min(batch_size, scenes.size());
  for (std::size_t i = 0; i < n; ++i) batch.push_back(&scenes[(index * n + i) % scenes.size()]);
  return batch;
}

template <typename Real>
StepResult Trainer<Real>::step(const std::vector<const TrainScene*>& batch) {
  if (batch.empty()) throw std::invalid_argument("train: empty batch");
  nn::ParamSet<Real> params = model_.params();
  params.zero_grad();
  const double weight = 1.0 / static_cast<double>(batch.size());
  StepResult result;
  for (const TrainScene* scene : batch) {
    const nn::Tensor<Real> spec = model_.forward(scene->mixture);
    const nn::Tensor<Real> est = istft_op(spec, model_.config().stft, scene->num_samples);
    const UpitResult best = upit_loss(rows(est), scene->targets, config_.loss_clamp_db);
    const nn::Tensor<Real> loss =
        nn::affine(si_sdr_loss(est, scene->targets, best.perm, config_.loss_clamp_db), weight);
    if (!std::isfinite(static_cast<double>(loss.item()))) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << adam_.steps_taken() << " (uPIT loss " << best.loss << ")";
      throw std::runtime_error(msg.str());
    }
    loss.backward();
    result.loss += weight * best.loss;
  }
  double norm2 = 0.0;
  for (const auto& e : params.entries()) {
    nn::Tensor<Real> t = e.tensor;
    if (!t.has_grad()) continue;
    for (Real g : t.grad()) norm2 += static_cast<double>(g) * static_cast<double>(g);
  }
  result.grad_norm = std::sqrt(norm2);
  if (!std::isfinite(result.grad_norm)) {
    throw std::runtime_error("non-finite gradient norm at step " + std::to_string(adam_.steps_taken()));
  }
  if (config_.grad_clip_norm > 0.0 && result.grad_norm > config_.grad_clip_norm) {
    const auto factor = static_cast<Real>(config_.grad_clip_norm / result.grad_norm);
    for (const auto& e : params.entries()) {
      nn::Tensor<Real> t = e.tensor;
      if (!t.has_grad()) continue;
      for (Real& g : t.grad()) g *= factor;
    }
  }
  adam_.step();
  return result;
}

TrainingLog::TrainingLog(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open training log " + path);
}

void TrainingLog::write(std::size_t step, double loss, double grad_norm, double wall_time_s) {
  nlohmann::json j;
  j["step"] = step;
  j["loss"] = loss;
  j["grad_norm"] = grad_norm;
  j["wall_time"] = wall_time_s;
  out_ << j.dump() << "\n";
  out_.flush();
}

template <typename Real>
double mean_upit_si_sdr(const pipeline::SeparationModel<Real>& model,
                        const std::vector<TrainScene>& scenes, double clamp_db) {
  if (scenes.empty()) throw std::invalid_argument("mean_upit_si_sdr: no scenes");
  double total = 0.0;
  for (const auto& scene : scenes) total -= score_scene(model, scene, clamp_db).upit.loss;
  return total / static_cast<double>(scenes.size());
}

template <typename Real>
std::vector<StepResult> run_training(Trainer<Real>& trainer, const std::vector<TrainScene>& scenes,
                                     std::size_t steps, std::size_t batch_size, TrainingLog* log,
                                     const StepCallback& on_step) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::vector<StepResult> results;
  results.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t index = static_cast<std::size_t>(trainer.steps_taken());
    const StepResult r = trainer.step(Trainer<Real>::batch_for(scenes, index, batch_size));
    const double wall = std::chrono::duration<double>(clock::now() - start).count();
    if (log) log->write(index + 1, r.loss, r.grad_norm, wall);
    if (on_step) on_step(index + 1, r, wall);
    results.push_back(r);
  }
  return results;
}

template class Adam<float>;
template class Adam<double>;
template class Trainer<float>;
template class Trainer<double>;
template std::vector<std::vector<double>> estimate_waveforms<float>(const pipeline::SeparationModel<float>&, const TrainScene&);
template std::vector<std::vector<double>> estimate_waveforms<double>(const pipeline::SeparationModel<double>&, const TrainScene&);
template SceneScore score_scene<float>(const pipeline::SeparationModel<float>&, const TrainScene&, double);
template SceneScore score_scene<double>(const pipeline::SeparationModel<double>&, const TrainScene&, double);
template double mean_upit_si_sdr<float>(const pipeline::SeparationModel<float>&, const std::vector<TrainScene>&, double);
template double mean_upit_si_sdr<double>(const pipeline::SeparationModel<double>&, const std::vector<TrainScene>&, double);
template std::vector<StepResult> run_training<float>(Trainer<float>&, const std::vector<TrainScene>&, std::size_t, std::size_t, TrainingLog*, const StepCallback&);
template std::vector<StepResult> run_training<double>(Trainer<double>&, const std::vector<TrainScene>&, std::size_t, std::size_t, TrainingLog*, const StepCallback&);

}  // namespace arraysep::train
