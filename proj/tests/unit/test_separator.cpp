// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>

#include "arraysep/nn/ops.h"
#include "arraysep/separator/separator.h"

namespace sep = arraysep::separator;
namespace nn = arraysep::nn;

namespace {

template <typename Real>
nn::Tensor<Real> random_map(std::size_t t, std::size_t f, std::size_t e, nn::Rng& rng) {
  std::vector<Real> v(t * f * e);
  for (auto& x : v) x = static_cast<Real>(rng.normal());
  return nn::Tensor<Real>({t, f, e}, std::move(v));
}

sep::SeparatorConfig toy_config() {
  sep::SeparatorConfig c;
  c.conformer.num_heads = 4;
  c.conformer.conv_kernel = 7;
  return c;
}

}  // namespace

TEST(PatchMerge, WindowOneIsPointwise) {
  nn::Rng rng(1);
  const sep::PatchMerge<double> m(4, 6, 1, rng);
  auto x = random_map<double>(5, 5, 4, rng);
  const auto y0 = m(x);
  ASSERT_EQ(y0.shape(), (nn::Shape{5, 5, 6}));
  x.data()[(2 * 5 + 3) * 4 + 1] += 1.0;
  const auto y1 = m(x);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t f = 0; f < 5; ++f) {
      bool same = true;
      for (std::size_t e = 0; e < 6; ++e) same &= y0.data()[(t * 5 + f) * 6 + e] == y1.data()[(t * 5 + f) * 6 + e];
      EXPECT_EQ(same, !(t == 2 && f == 3)) << t << "," << f;
    }
}

TEST(PatchMerge, WindowTwoHalvesTheGrid) {
  nn::Rng rng(2);
  const sep::PatchMerge<double> m(4, 8, 2, rng);
  EXPECT_EQ(m(random_map<double>(8, 8, 4, rng)).shape(), (nn::Shape{4, 4, 8}));
  EXPECT_THROW(m(random_map<double>(7, 8, 4, rng)), std::invalid_argument);
}

TEST(PatchExpand, RestoresResolutionAndZeroSkipIsNoSkip) {
  nn::Rng rng(3);
  const sep::PatchMerge<double> m(4, 8, 2, rng);
  const sep::PatchExpand<double> e(8, 4, 2, rng);
  const auto x = random_map<double>(6, 10, 4, rng);
  const auto merged = m(x);
  const auto a = e(merged, 5, 9, nn::Tensor<double>());
  EXPECT_EQ(a.shape(), (nn::Shape{5, 9, 4}));
  const auto b = e(merged, 5, 9, nn::Tensor<double>({5, 9, 4}));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
  EXPECT_THROW(e(merged, 5, 9, nn::Tensor<double>({5, 8, 4})), std::invalid_argument);
}

TEST(LevelGrids, PadsOnceToTheTotalFactor) {
  const auto c = toy_config();
  EXPECT_EQ(c.total_factor(), 4u);
  const auto g = sep::level_grids(c, 10, 257);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].rows, 10u);
  EXPECT_EQ(g[0].cols, 257u);
  EXPECT_EQ(g[1].padded_rows, 12u);
  EXPECT_EQ(g[1].padded_cols, 260u);
  EXPECT_EQ(g[1].rows, 6u);
  EXPECT_EQ(g[1].cols, 130u);
  EXPECT_EQ(g[2].padded_rows, 6u);
  EXPECT_EQ(g[2].padded_cols, 130u);
  EXPECT_EQ(g[2].rows, 3u);
  EXPECT_EQ(g[2].cols, 65u);
}

TEST(LevelGrids, DivisibleInputIsNotPadded) {
  const auto g = sep::level_grids(toy_config(), 8, 16);
  EXPECT_EQ(g[1].padded_rows, 8u);
  EXPECT_EQ(g[1].padded_cols, 16u);
  EXPECT_EQ(g[2].rows, 2u);
  EXPECT_EQ(g[2].cols, 4u);
}

TEST(Separator, ShapeContractOnFullBandInputs) {
  nn::Rng rng(4);
  const sep::Separator<float> s(toy_config(), rng);
  for (std::size_t t : {50u, 100u}) {
    const auto y = s(random_map<float>(t, 257, 8, rng));
    EXPECT_EQ(y.shape(), (nn::Shape{t, 257, 4}));
    for (float v : y.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Separator, OddGridsRoundTrip) {
  nn::Rng rng(5);
  auto c = toy_config();
  c.num_speakers = 3;
  const sep::Separator<double> s(c, rng);
  for (auto [t, f] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 5}, {9, 2}}) {
    EXPECT_EQ(s(random_map<double>(t, f, 8, rng)).shape(), (nn::Shape{t, f, 6}));
  }
}

TEST(Separator, WrongFeatureSizeThrows) {
  nn::Rng rng(6);
  const sep::Separator<double> s(toy_config(), rng);
  EXPECT_THROW(s(random_map<double>(4, 4, 7, rng)), std::invalid_argument);
}

TEST(Separator, ConfigValidation) {
  auto c = toy_config();
  c.level_dims = {8, 16};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = toy_config();
  c.merge_windows = {1, 0, 2};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = toy_config();
  c.num_speakers = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Conformer, ZeroedBranchesLeaveTheFinalNorm) {
  nn::ConformerConfig cc;
  nn::Rng rng(7);
  nn::ConformerBlock<double> b(cc, rng);
  b.zero_branch_outputs();
  const auto x = random_map<double>(3, 6, 8, rng);
  const auto y = b(x);
  const auto want = nn::layer_norm(x, b.final_norm.gamma, b.final_norm.beta);
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_NEAR(y.data()[i], want.data()[i], 1e-12);
}

TEST(DualPath, TimePathMixesOnlyAlongTime) {
  // one time layer, frequency layers zeroed: output cell (t, f) depends on
  // column f only
  nn::ConformerConfig cc;
  nn::Rng rng(8);
  sep::DualPathBlock<double> dp(cc, rng);
  for (auto& l : dp.freq_layers) l.zero_branch_outputs();
  auto x = random_map<double>(4, 5, 8, rng);
  const auto y0 = dp(x);
  x.data()[(1 * 5 + 2) * 8 + 3] += 0.5;
  const auto y1 = dp(x);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t f = 0; f < 5; ++f) {
      double diff = 0.0;
      for (std::size_t e = 0; e < 8; ++e) diff += std::abs(y0.data()[(t * 5 + f) * 8 + e] - y1.data()[(t * 5 + f) * 8 + e]);
      if (f == 2) {
        EXPECT_GT(diff, 0.0);
      } else {
        EXPECT_EQ(diff, 0.0);
      }
    }
}
