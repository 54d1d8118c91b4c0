// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "arraysep/fusion/fusion.h"

namespace fusion = arraysep::fusion;
namespace nn = arraysep::nn;
namespace dsp = arraysep::dsp;

namespace {

using T = nn::Tensor<double>;

fusion::FusionConfig small_config() {
  fusion::FusionConfig c;
  c.embed_dim = 8;
  c.extractor_kernel = 3;
  c.aff_bottleneck_ratio = 2;
  c.aff_iterations = 2;
  return c;
}

T random_map(std::size_t t, std::size_t f, std::size_t e, nn::Rng& rng) {
  std::vector<double> v(t * f * e);
  for (auto& x : v) x = rng.normal();
  return T({t, f, e}, std::move(v));
}

}  // namespace

TEST(Planes, ReferenceAndAllPlanesLayout) {
  dsp::ComplexSpectrogram s(2, 3, 2);
  for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = {double(i), -double(i)};
  const auto ref = fusion::reference_planes<double>(s, 1);
  EXPECT_EQ(ref.shape(), (nn::Shape{2, 3, 2}));
  EXPECT_EQ(ref.data()[0], s.at(0, 0, 1).real());
  EXPECT_EQ(ref.data()[1], s.at(0, 0, 1).imag());
  const auto all = fusion::all_planes<double>(s);
  EXPECT_EQ(all.shape(), (nn::Shape{2, 3, 4}));
  EXPECT_EQ(all.data()[(1 * 3 + 2) * 4 + 2], s.at(1, 2, 1).real());
  EXPECT_EQ(all.data()[(1 * 3 + 2) * 4 + 3], s.at(1, 2, 1).imag());
  EXPECT_THROW(fusion::reference_planes<double>(s, 2), std::out_of_range);
}

TEST(Extractor, KeepsTheGridAndEmitsEChannels) {
  nn::Rng rng(1);
  const fusion::LocalPatternExtractor<double> ex(small_config(), rng);
  dsp::ComplexSpectrogram s(7, 9, 3);
  for (auto& z : s.data) z = {rng.normal(), rng.normal()};
  EXPECT_EQ(ex(s).shape(), (nn::Shape{7, 9, 8}));
}

TEST(Extractor, ZeroInputGivesConstantInterior) {
  nn::Rng rng(2);
  const auto cfg = small_config();
  const fusion::LocalPatternExtractor<double> ex(cfg, rng);
  const auto y = ex(dsp::ComplexSpectrogram(6, 7, 1));
  // rows and columns within kernel / 2 of the border see the zero padding
  for (std::size_t t = 1; t + 1 < 6; ++t)
    for (std::size_t f = 1; f + 1 < 7; ++f)
      for (std::size_t e = 0; e < 8; ++e) {
        EXPECT_NEAR(y.data()[(t * 7 + f) * 8 + e], y.data()[(1 * 7 + 1) * 8 + e], 1e-14);
      }
}

TEST(Fusion, OutputIsConvexCombinationWithMasksInUnitInterval) {
  nn::Rng rng(3);
  const fusion::AttentionalFusion<double> aff(small_config(), rng);
  const T x = random_map(4, 5, 8, rng), y = random_map(4, 5, 8, rng);
  std::vector<T> masks;
  const T z = aff.fuse(x, y, &masks);
  ASSERT_EQ(masks.size(), 2u);
  for (const auto& m : masks) {
    for (double v : m.data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
  const auto& m = masks.back();
  for (std::size_t i = 0; i < z.numel(); ++i) {
    EXPECT_NEAR(z.data()[i], m.data()[i] * x.data()[i] + (1.0 - m.data()[i]) * y.data()[i], 1e-12);
    EXPECT_GE(z.data()[i], std::min(x.data()[i], y.data()[i]) - 1e-12);
    EXPECT_LE(z.data()[i], std::max(x.data()[i], y.data()[i]) + 1e-12);
  }
}

TEST(Fusion, IdenticalInputsPassThrough) {
  nn::Rng rng(4);
  const fusion::AttentionalFusion<double> aff(small_config(), rng);
  const T x = random_map(3, 4, 8, rng);
  const T z = aff(x, x);
  for (std::size_t i = 0; i < z.numel(); ++i) EXPECT_NEAR(z.data()[i], x.data()[i], 1e-12);
}

TEST(Fusion, SaturatedMaskSelectsOneBranch) {
  nn::Rng rng(5);
  auto cfg = small_config();
  cfg.aff_iterations = 1;
  fusion::AttentionalFusion<double> aff(cfg, rng);
  // push every logit far positive (mask -> 1, output -> X) or negative (-> Y)
  for (double shift : {60.0, -60.0}) {
    auto& ca = aff.stages[0];
    for (auto* lin : {&ca.local.expand, &ca.global.expand}) {
      std::fill(lin->weight.data().begin(), lin->weight.data().end(), 0.0);
      std::fill(lin->bias.data().begin(), lin->bias.data().end(), shift / 2.0);
    }
    const T x = random_map(2, 3, 8, rng), y = random_map(2, 3, 8, rng);
    const T z = aff(x, y);
    const T& pick = shift > 0 ? x : y;
    for (std::size_t i = 0; i < z.numel(); ++i) EXPECT_NEAR(z.data()[i], pick.data()[i], 1e-12);
  }
}

TEST(Fusion, ShapeMismatchThrows) {
  nn::Rng rng(6);
  const fusion::AttentionalFusion<double> aff(small_config(), rng);
  EXPECT_THROW(aff(random_map(2, 3, 8, rng), random_map(2, 4, 8, rng)), std::invalid_argument);
}

TEST(Fusion, ConfigValidation) {
  auto c = small_config();
  c.extractor_kernel = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.aff_iterations = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
