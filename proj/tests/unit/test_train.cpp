// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "arraysep/sim/dataset.h"
#include "arraysep/train/checkpoint.h"
#include "arraysep/train/loss.h"
#include "arraysep/train/metrics.h"
#include "arraysep/train/trainer.h"
#include "arraysep/verify/oracles.h"

namespace train = arraysep::train;
namespace pipeline = arraysep::pipeline;
namespace dsp = arraysep::dsp;
namespace nn = arraysep::nn;
namespace fs = std::filesystem;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(eng);
  return v;
}

// Direct evaluation of the definition, sharing no code with the library.
double si_sdr_direct(const std::vector<double>& est, const std::vector<double>& ref) {
  long double dot = 0, rr = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    dot += static_cast<long double>(est[i]) * ref[i];
    rr += static_cast<long double>(ref[i]) * ref[i];
  }
  const long double a = dot / rr;
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const long double t = a * ref[i];
    num += t * t;
    den += (t - est[i]) * (t - est[i]);
  }
  return static_cast<double>(10.0L * std::log10(num / den));
}

pipeline::ModelConfig small_model() {
  auto c = pipeline::ModelConfig::toy();
  c.set("stft.sample_rate", "4000");
  c.set("merge_windows", "1,2");
  c.set("level_dims", "8,8");
  return c;
}

std::vector<train::TrainScene> small_scenes(const pipeline::ModelConfig& cfg, std::size_t n) {
  arraysep::sim::DatasetSpec spec;
  spec.num_scenes = n;
  spec.duration_s = 0.4;
  spec.sample_rate = cfg.stft.sample_rate;
  std::vector<train::TrainScene> out;
  for (const auto& s : arraysep::sim::synth_dataset(spec)) out.push_back(train::make_train_scene(s, cfg.stft));
  return out;
}

}  // namespace

TEST(SiSdr, PerfectEstimateHitsTheCeiling) {
  const auto r = gaussian(1000, 1);
  EXPECT_EQ(train::si_sdr(r, r), 30.0);
  EXPECT_EQ(train::si_sdr(r, r, 50.0), 50.0);
}

TEST(SiSdr, IsScaleInvariant) {
  const auto r = gaussian(800, 2);
  auto e = gaussian(800, 3);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = r[i] + 0.3 * e[i];
  auto scaled = e;
  for (auto& x : scaled) x *= -7.5;
  EXPECT_NEAR(train::si_sdr(scaled, r), train::si_sdr(e, r), 1e-10);
}

TEST(SiSdr, OrthogonalResidualOfEqualEnergyIsZeroDb) {
  // ref = (1, 1, 0, 0), residual (1, -1, 0, 0) orthogonal with equal energy
  const std::vector<double> ref = {1, 1, 0, 0}, est = {2, 0, 0, 0};
  EXPECT_NEAR(train::si_sdr(est, ref), 0.0, 1e-12);
}

TEST(SiSdr, MatchesDirectEvaluationOnRandomPairs) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = gaussian(500, 10 + s);
    auto e = gaussian(500, 100 + s);
    const double mix = 0.05 * static_cast<double>(s);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = r[i] + (1.0 - mix) * e[i] * 0.7;
    const double want = std::clamp(si_sdr_direct(e, r), -30.0, 30.0);
    EXPECT_NEAR(train::si_sdr(e, r), want, 1e-9);
  }
}

TEST(SiSdr, RejectsZeroReferenceAndLengthMismatch) {
  const std::vector<double> z(10, 0.0), a(10, 1.0), b(9, 1.0);
  EXPECT_THROW(train::si_sdr(a, z), std::invalid_argument);
  EXPECT_THROW(train::si_sdr(a, b), std::invalid_argument);
}

TEST(SiSdri, ImprovementOverTheMixture) {
  const auto s0 = gaussian(1000, 4), s1 = gaussian(1000, 5);
  std::vector<double> mix(1000);
  for (std::size_t i = 0; i < 1000; ++i) mix[i] = s0[i] + s1[i];
  // mixture vs s0 is about 0 dB; the exact estimate hits 30
  EXPECT_NEAR(train::si_sdri(s0, s0, mix), 30.0 - train::si_sdr(mix, s0), 1e-12);
  EXPECT_NEAR(train::si_sdri(mix, s0, mix), 0.0, 1e-12);
}

TEST(Upit, FindsTheSwappedAssignment) {
  const auto a = gaussian(600, 6), b = gaussian(600, 7), c = gaussian(600, 8);
  auto noisy = [](std::vector<double> x, std::uint64_t seed) {
    const auto n = gaussian(x.size(), seed);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 0.1 * n[i];
    return x;
  };
  const std::vector<std::vector<double>> refs = {a, b, c};
  const auto ident = train::upit_loss({noisy(a, 1), noisy(b, 2), noisy(c, 3)}, refs);
  EXPECT_EQ(ident.perm, (std::vector<std::size_t>{0, 1, 2}));
  const auto swapped = train::upit_loss({noisy(c, 1), noisy(a, 2), noisy(b, 3)}, refs);
  EXPECT_EQ(swapped.perm, (std::vector<std::size_t>{2, 0, 1}));
  EXPECT_GT(-swapped.loss, 15.0);
  const auto oracle = arraysep::verify::upit_oracle({noisy(c, 1), noisy(a, 2), noisy(b, 3)}, refs);
  EXPECT_EQ(oracle.perm, swapped.perm);
  EXPECT_NEAR(oracle.loss, swapped.loss, 1e-12);
}

TEST(Upit, TooManySpeakersThrows) {
  const std::vector<std::vector<double>> five(5, gaussian(10, 1));
  EXPECT_THROW(train::upit_loss(five, five), std::invalid_argument);
}

TEST(Loss, IstftOpMatchesTheDspInverse) {
  const dsp::StftConfig cfg;
  dsp::Waveform w(16000, 2, 3000);
  w.channels[0] = gaussian(3000, 9);
  w.channels[1] = gaussian(3000, 10);
  const auto spec = dsp::stft(w, cfg);
  std::vector<double> packed(spec.frames * spec.bins * 4);
  for (std::size_t t = 0; t < spec.frames; ++t)
    for (std::size_t f = 0; f < spec.bins; ++f)
      for (std::size_t k = 0; k < 2; ++k) {
        packed[(t * spec.bins + f) * 4 + 2 * k] = spec.at(t, f, k).real();
        packed[(t * spec.bins + f) * 4 + 2 * k + 1] = spec.at(t, f, k).imag();
      }
  const auto y = train::istft_op(nn::Tensor<double>({spec.frames, spec.bins, 4}, packed), cfg, 3000);
  const auto ref = dsp::istft(spec, cfg, 3000);
  ASSERT_EQ(y.shape(), (nn::Shape{2, 3000}));
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t n = 0; n < 3000; ++n) ASSERT_NEAR(y.data()[k * 3000 + n], ref.channels[k][n], 1e-12);
}

TEST(Loss, ValueEqualsNegativeMeanSiSdr) {
  const auto a = gaussian(400, 11), b = gaussian(400, 12), na = gaussian(400, 13), nb = gaussian(400, 14);
  std::vector<double> est(800);
  for (std::size_t i = 0; i < 400; ++i) {
    est[i] = b[i] + 0.5 * nb[i];
    est[400 + i] = a[i] + 0.2 * na[i];
  }
  const nn::Tensor<double> e({2, 400}, est);
  const auto loss = train::si_sdr_loss(e, {a, b}, {1, 0});
  const std::vector<double> e0(est.begin(), est.begin() + 400), e1(est.begin() + 400, est.end());
  EXPECT_NEAR(loss.item(), -0.5 * (train::si_sdr(e0, b) + train::si_sdr(e1, a)), 1e-10);
}

TEST(Trainer, CyclicBatches) {
  std::vector<train::TrainScene> scenes(3);
  const auto b = train::Trainer<float>::batch_for(scenes, 1, 2);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], &scenes[2]);
  EXPECT_EQ(b[1], &scenes[0]);
}

TEST(Trainer, StepsAreFiniteAndDeterministic) {
  const auto cfg = small_model();
  const auto scenes = small_scenes(cfg, 2);
  train::TrainConfig tc;
  tc.steps = 3;
  std::vector<double> losses[2];
  std::vector<float> params[2];
  for (int run = 0; run < 2; ++run) {
    pipeline::SeparationModel<float> model(cfg);
    train::Trainer<float> trainer(model, tc);
    for (const auto& r : train::run_training(trainer, scenes, 3, 1, nullptr)) {
      EXPECT_TRUE(std::isfinite(r.loss));
      EXPECT_TRUE(std::isfinite(r.grad_norm));
      losses[run].push_back(r.loss);
    }
    EXPECT_EQ(trainer.steps_taken(), 3u);
    for (const auto& e : model.params().entries()) params[run].insert(params[run].end(), e.tensor.data().begin(), e.tensor.data().end());
  }
  EXPECT_EQ(losses[0], losses[1]);
  EXPECT_EQ(params[0], params[1]);
}

TEST(Trainer, RejectsBadConfig) {
  train::TrainConfig tc;
  tc.lr = 0.0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
  tc = {};
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
}

TEST(Checkpoint, RoundTripAndFingerprintMismatch) {
  const auto cfg = small_model();
  pipeline::SeparationModel<float> a(cfg);
  const auto path = (fs::temp_directory_path() / "arraysep_test_train.ckpt").string();
  train::save_checkpoint(path, a, 42);

  auto other = cfg;
  other.seed = 9;  // different values, same architecture
  pipeline::SeparationModel<float> b(other);
  EXPECT_EQ(train::load_checkpoint(path, b), 42u);
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    const auto x = a.params().entries()[i].tensor.data(), y = b.params().entries()[i].tensor.data();
    ASSERT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
  }
  EXPECT_EQ(train::checkpoint_config(path).fingerprint(), cfg.fingerprint());

  auto wider = cfg;
  wider.set("num_speakers", "3");
  pipeline::SeparationModel<float> c(wider);
  EXPECT_THROW(train::load_checkpoint(path, c), nn::SerializeError);
}

TEST(Log, OneJsonObjectPerLine) {
  const auto path = (fs::temp_directory_path() / "arraysep_test_log.jsonl").string();
  {
    train::TrainingLog log(path);
    log.write(1, -3.5, 12.0, 0.25);
    log.write(2, -4.0, 8.0, 0.5);
  }
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ++n;
    EXPECT_EQ(j.at("step").get<std::size_t>(), n);
    EXPECT_TRUE(j.contains("loss"));
    EXPECT_TRUE(j.contains("grad_norm"));
    EXPECT_TRUE(j.contains("wall_time"));
  }
  EXPECT_EQ(n, 2u);
}
