// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "arraysep/pipeline/model.h"
#include "arraysep/sim/scene.h"

namespace pipeline = arraysep::pipeline;
namespace dsp = arraysep::dsp;
namespace nn = arraysep::nn;

namespace {

dsp::Waveform noise(std::size_t channels, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd(0.0, 0.1);
  dsp::Waveform w(16000, channels, samples);
  for (auto& ch : w.channels)
    for (auto& x : ch) x = nd(eng);
  return w;
}

}  // namespace

TEST(Config, ToyAndFullScales) {
  const auto toy = pipeline::ModelConfig::toy();
  EXPECT_EQ(toy.embed_dim(), 8u);
  EXPECT_EQ(toy.separator.level_dims, (std::vector<std::size_t>{8, 16, 32}));
  const auto full = pipeline::ModelConfig::full();
  EXPECT_EQ(full.embed_dim(), 64u);
  EXPECT_EQ(full.separator.level_dims, (std::vector<std::size_t>{64, 128, 256}));
  EXPECT_EQ(full.separator.conformer.conv_kernel, 15u);
  EXPECT_NO_THROW(full.validate());
}

TEST(Config, SetAndFingerprintRoundTrip) {
  auto c = pipeline::ModelConfig::toy();
  c.set("augment", "zero_pad");
  c.set("spatial", "fsdl");
  c.set("inner_product", "transpose");
  c.set("merge_windows", "1,2");
  c.set("level_dims", "8,16");
  c.set("num_speakers", "3");
  c.set("skip_connections", "false");
  const auto back = pipeline::ModelConfig::from_fingerprint(c.fingerprint());
  EXPECT_EQ(back.fingerprint(), c.fingerprint());
  EXPECT_EQ(back.augment, arraysep::vme::AugmentMode::kZeroPad);
  EXPECT_EQ(back.spatial, pipeline::SpatialMode::kFsdl);
  EXPECT_EQ(back.separator.num_speakers, 3u);
  EXPECT_FALSE(back.separator.skip_connections);
  EXPECT_NE(c.fingerprint(), pipeline::ModelConfig::toy().fingerprint());
}

TEST(Config, BadKeysAndValuesThrow) {
  auto c = pipeline::ModelConfig::toy();
  EXPECT_THROW(c.set("no_such_key", "1"), std::invalid_argument);
  EXPECT_THROW(c.set("max_channels", "-1"), std::invalid_argument);
  EXPECT_THROW(c.set("spatial", "maybe"), std::invalid_argument);
  EXPECT_THROW(c.set("normalize_input", "yes please"), std::invalid_argument);
  EXPECT_THROW(c.set("scale", "huge"), std::invalid_argument);
  c.set("reference_channel", "8");
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Model, ForwardShapeForEveryChannelCount) {
  const pipeline::SeparationModel<float> model(pipeline::ModelConfig::toy());
  for (std::size_t c = 1; c <= 8; c += 3) {
    const auto spec = dsp::stft(noise(c, 4000, c), model.config().stft);
    const auto y = model.forward(spec);
    EXPECT_EQ(y.shape(), (nn::Shape{spec.frames, 257, 4})) << c;
    for (float v : y.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Model, AblationModesKeepTheContract) {
  for (const char* key : {"augment=zero_pad", "spatial=off", "spatial=fsdl", "inner_product=transpose"}) {
    auto cfg = pipeline::ModelConfig::toy();
    const std::string kv = key;
    cfg.set(kv.substr(0, kv.find('=')), kv.substr(kv.find('=') + 1));
    const pipeline::SeparationModel<float> model(cfg);
    const auto spec = dsp::stft(noise(3, 3000, 9), cfg.stft);
    EXPECT_EQ(model.forward(spec).shape(), (nn::Shape{spec.frames, 257, 4})) << key;
  }
}

TEST(Model, SpatialOffHasNoDictionary) {
  auto cfg = pipeline::ModelConfig::toy();
  cfg.set("spatial", "off");
  const pipeline::SeparationModel<float> model(cfg);
  for (const auto& e : model.params().entries()) EXPECT_EQ(e.name.find("dictionary"), std::string::npos) << e.name;
}

TEST(Model, FsdlDictionaryHasOneMatrixPerBin) {
  auto cfg = pipeline::ModelConfig::toy();
  cfg.set("spatial", "fsdl");
  const pipeline::SeparationModel<float> model(cfg);
  EXPECT_EQ(model.dictionary.real.shape(), (nn::Shape{257, 8, 8}));
}

TEST(Model, RejectsTooManyChannelsAndForeignStft) {
  const pipeline::SeparationModel<float> model(pipeline::ModelConfig::toy());
  EXPECT_THROW(model.forward(dsp::stft(noise(9, 2000, 1), model.config().stft)), std::invalid_argument);
  dsp::StftConfig other;
  other.shift_s = 0.008;
  EXPECT_THROW(model.forward(dsp::stft(noise(2, 2000, 1), other)), std::invalid_argument);
}

TEST(Model, SeparateReturnsKWaveformsOfInputLength) {
  const pipeline::SeparationModel<float> model(pipeline::ModelConfig::toy());
  const auto out = model.separate(noise(2, 5003, 4));
  ASSERT_EQ(out.size(), 2u);
  for (const auto& w : out) {
    EXPECT_EQ(w.num_channels(), 1u);
    EXPECT_EQ(w.num_samples(), 5003u);
  }
}

TEST(Model, NormalizationMakesOutputScaleEquivariant) {
  const pipeline::SeparationModel<double> model(pipeline::ModelConfig::toy());
  const auto w = noise(2, 3000, 5);
  auto loud = w;
  for (auto& ch : loud.channels)
    for (auto& x : ch) x *= 4.0;
  const auto a = model.separate(w);
  const auto b = model.separate(loud);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t n = 0; n < 3000; ++n) ASSERT_NEAR(b[k].channels[0][n], 4.0 * a[k].channels[0][n], 1e-9);
}

TEST(Model, SameSeedSameParameters) {
  const pipeline::SeparationModel<float> a(pipeline::ModelConfig::toy());
  const pipeline::SeparationModel<float> b(pipeline::ModelConfig::toy());
  ASSERT_EQ(a.params().size(), b.params().size());
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    const auto x = a.params().entries()[i].tensor.data(), y = b.params().entries()[i].tensor.data();
    ASSERT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
  }
}
