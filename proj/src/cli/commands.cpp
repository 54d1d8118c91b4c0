// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/cli/commands.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "arraysep/dsp/wav.h"
#include "arraysep/sim/scene.h"
#include "arraysep/train/checkpoint.h"
#include "arraysep/train/metrics.h"
#include "arraysep/train/trainer.h"
#include "arraysep/verify/checks.h"

namespace arraysep::cli {

namespace fs = std::filesystem;

namespace {

std::string scene_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%03zu", i);
  return buf;
}

fs::path resolve(const fs::path& manifest, const std::string& relative) {
  const fs::path p(relative);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

std::string relative_to(const fs::path& file, const fs::path& manifest) {
  const fs::path base = fs::absolute(manifest).parent_path();
  return fs::absolute(file).lexically_normal().lexically_relative(base.lexically_normal()).generic_string();
}

sim::DatasetSpec dataset_for(const RunConfig& config) {
  sim::DatasetSpec spec = config.dataset;
  spec.sample_rate = config.model.stft.sample_rate;
  spec.num_speakers = config.model.separator.num_speakers;
  return spec;
}

train::TrainScene load_scene(const fs::path& manifest, const sim::ManifestEntry& e,
                             const dsp::StftConfig& stft) {
  sim::MixtureScene scene;
  scene.mixture = dsp::read_wav(resolve(manifest, e.mixture));
  if (scene.mixture.sample_rate != stft.sample_rate) {
    throw std::invalid_argument(e.id + ": mixture rate " + std::to_string(scene.mixture.sample_rate) +
                                " Hz, model expects " + std::to_string(stft.sample_rate));
  }
  for (const auto& t : e.targets) {
    dsp::Waveform w = dsp::read_wav(resolve(manifest, t));
    if (w.num_samples() != scene.mixture.num_samples()) {
      throw std::runtime_error(e.id + ": target " + t + " length differs from the mixture");
    }
    scene.targets.push_back(std::move(w));
  }
  return train::make_train_scene(scene, stft);
}

pipeline::SeparationModel<float> load_model(const fs::path& checkpoint) {
  const pipeline::ModelConfig cfg = train::checkpoint_config(checkpoint.string());
  pipeline::SeparationModel<float> model(cfg);
  train::load_checkpoint(checkpoint.string(), model);
  return model;
}

}  // namespace

dsp::Waveform rotate_channels(const dsp::Waveform& wave, std::size_t first) {
  if (first >= wave.num_channels()) {
    throw std::invalid_argument("reference channel " + std::to_string(first) + " out of range for " +
                                std::to_string(wave.num_channels()) + " channels");
  }
  dsp::Waveform out = wave;
  std::rotate(out.channels.begin(), out.channels.begin() + static_cast<std::ptrdiff_t>(first),
              out.channels.end());
  return out;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  const sim::DatasetSpec spec = dataset_for(config);
  const auto scenes = sim::synth_dataset(spec);
  const fs::path manifest = config.manifest_path();
  const fs::path dir = config.out_dir / "scenes";
  fs::create_directories(dir);
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());

  std::vector<sim::ManifestEntry> entries;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    sim::ManifestEntry e;
    e.id = scene_id(i);
    e.seed = s.seed;
    e.geometry = spec.geometry;
    e.t60_s = s.t60_s;
    e.snr_db = s.snr_db;
    e.overlap_ratio = s.overlap_ratio;
    const fs::path mix = dir / (e.id + "_mix.wav");
    dsp::write_wav(mix, s.mixture);
    e.mixture = relative_to(mix, manifest);
    for (std::size_t k = 0; k < s.targets.size(); ++k) {
      const fs::path t = dir / (e.id + "_s" + std::to_string(k) + ".wav");
      dsp::write_wav(t, s.targets[k]);
      e.targets.push_back(relative_to(t, manifest));
    }
    entries.push_back(std::move(e));
  }
  sim::write_manifest(manifest, entries);
  out << "wrote " << entries.size() << " scenes (" << spec.geometry << ", " << spec.num_speakers
      << " speakers) to " << manifest.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  std::vector<train::TrainScene> scenes;
  const fs::path manifest = config.manifest_path();
  if (fs::exists(manifest)) {
    for (const auto& e : sim::read_manifest(manifest)) scenes.push_back(load_scene(manifest, e, config.model.stft));
    out << "training on " << scenes.size() << " scenes from " << manifest.string() << "\n";
  } else {
    for (const auto& s : sim::synth_dataset(dataset_for(config))) {
      scenes.push_back(train::make_train_scene(s, config.model.stft));
    }
    out << "training on " << scenes.size() << " synthesized scenes (no manifest at " << manifest.string()
        << ")\n";
  }
  if (scenes.empty()) throw std::invalid_argument("no training scenes");

  pipeline::SeparationModel<float> model(config.model);
  train::Trainer<float> trainer(model, config.train);
  const fs::path log_path = config.log_path();
  const fs::path ckpt = config.checkpoint_path();
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  train::TrainingLog log(log_path.string());

  const double before = train::mean_upit_si_sdr(model, scenes, config.train.loss_clamp_db);
  const std::size_t every = std::max<std::size_t>(1, config.train.steps / 20);
  train::run_training(trainer, scenes, config.train.steps, config.train.batch_size, &log,
                      [&](std::size_t step, const train::StepResult& r, double wall) {
                        if (step % every == 0 || step == 1) {
                          out << "step " << step << "  loss " << std::fixed << std::setprecision(3) << r.loss
                              << "  grad_norm " << r.grad_norm << "  " << std::setprecision(1) << wall
                              << " s" << std::defaultfloat << std::endl;
                        }
                      });
  const double after = train::mean_upit_si_sdr(model, scenes, config.train.loss_clamp_db);
  train::save_checkpoint(ckpt.string(), model, trainer.steps_taken());
  out << std::fixed << std::setprecision(2) << "training SI-SDR " << before << " -> " << after
      << " dB; checkpoint " << ckpt.string() << ", log " << log_path.string() << std::defaultfloat << "\n";
  return 0;
}

int cmd_separate(const SeparateOptions& options, std::ostream& out, std::vector<fs::path>* written) {
  const auto model = load_model(options.checkpoint);
  dsp::Waveform wave = dsp::read_wav(options.input);
  if (wave.sample_rate != model.config().stft.sample_rate) {
    throw std::invalid_argument("input is " + std::to_string(wave.sample_rate) + " Hz, model expects " +
                                std::to_string(model.config().stft.sample_rate));
  }
  wave = rotate_channels(wave, options.reference_channel);
  const auto estimates = model.separate(wave);
  const fs::path dir = options.out_dir.empty() ? options.input.parent_path() : options.out_dir;
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = options.input.stem().string();
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const fs::path p = dir / (stem + "_s" + std::to_string(k) + ".wav");
    dsp::write_wav(p, estimates[k]);
    if (written) written->push_back(p);
    out << p.string() << "\n";
  }
  return 0;
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::vector<EvalRow>* rows_out) {
  const auto entries = sim::read_manifest(options.manifest);
  if (entries.empty()) throw std::invalid_argument("manifest has no scenes");
  std::unique_ptr<pipeline::SeparationModel<float>> model;
  if (!options.oracle) {
    model = std::make_unique<pipeline::SeparationModel<float>>(load_model(options.checkpoint));
  }

  std::vector<EvalRow> rows(entries.size());
  std::vector<std::string> errors(entries.size());
  const auto score = [&](std::size_t i) {
    const auto& e = entries[i];
    const dsp::Waveform mix = dsp::read_wav(resolve(options.manifest, e.mixture));
    std::vector<std::vector<double>> refs;
    for (const auto& t : e.targets) refs.push_back(dsp::read_wav(resolve(options.manifest, t)).channels.at(0));
    std::vector<std::vector<double>> est;
    if (options.oracle) {
      est = refs;
    } else {
      for (const auto& w : model->separate(mix)) est.push_back(w.channels.at(0));
    }
    const train::UpitResult best = train::upit_loss(est, refs);
    double sdri = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
      sdri += train::si_sdri(est[k], refs[best.perm[k]], mix.channels.at(0));
    }
    rows[i] = {e.id, -best.loss, sdri / static_cast<double>(est.size())};
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        score(i);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(options.workers, 1, entries.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw std::runtime_error(entries[i].id + ": " + errors[i]);
  }

  double mean_sdr = 0.0, mean_sdri = 0.0;
  out << std::left << std::setw(16) << "scene" << std::right << std::setw(12) << "SI-SDR" << std::setw(12)
      << "SI-SDRi" << "\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    out << std::left << std::setw(16) << r.id << std::right << std::setw(12) << r.si_sdr << std::setw(12)
        << r.si_sdri << "\n";
    mean_sdr += r.si_sdr;
    mean_sdri += r.si_sdri;
  }
  const double n = static_cast<double>(rows.size());
  out << std::left << std::setw(16) << "mean" << std::right << std::setw(12) << mean_sdr / n << std::setw(12)
      << mean_sdri / n << "\n"
      << std::defaultfloat;
  if (rows_out) *rows_out = rows;
  return 0;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  const auto results = verify::run_suite(options.include_training, out, options.training_log.string());
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  out << (failed == 0 ? "all " + std::to_string(results.size()) + " checks passed"
                      : std::to_string(failed) + " of " + std::to_string(results.size()) + " checks failed")
      << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace arraysep::cli
