// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "arraysep/verify/oracles.h"
#include "arraysep/vme/vme.h"

namespace vme = arraysep::vme;
namespace dsp = arraysep::dsp;

namespace {

using C = std::complex<double>;
using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

dsp::ComplexSpectrogram random_spec(std::size_t t, std::size_t f, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  dsp::ComplexSpectrogram s(t, f, c);
  for (auto& z : s.data) z = {nd(eng), nd(eng)};
  return s;
}

}  // namespace

TEST(Plan, ThreeMicsIntoEight) {
  const auto p = vme::plan_virtual_mics(3, 8);
  EXPECT_EQ(p.num_virtual, 5u);
  EXPECT_EQ(p.pairs, (Pairs{{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_EQ(p.counts, (std::vector<std::size_t>{2, 2, 1}));
  ASSERT_EQ(p.virtual_mics.size(), 5u);
  EXPECT_NEAR(p.virtual_mics[0].alpha, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.virtual_mics[1].alpha, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(p.virtual_mics[4].first, 2u);
  EXPECT_EQ(p.virtual_mics[4].second, 0u);
  EXPECT_NEAR(p.virtual_mics[4].alpha, 0.5, 1e-15);
}

TEST(Plan, FullArrayNeedsNoVirtualMics) {
  const auto p = vme::plan_virtual_mics(8, 8);
  EXPECT_EQ(p.num_virtual, 0u);
  EXPECT_TRUE(p.virtual_mics.empty());
  EXPECT_EQ(p.counts, std::vector<std::size_t>(8, 0));
}

TEST(Plan, TwoMicsUseBothDirections) {
  const auto p = vme::plan_virtual_mics(2, 8);
  EXPECT_EQ(p.pairs, (Pairs{{0, 1}, {1, 0}}));
  EXPECT_EQ(p.counts, (std::vector<std::size_t>{3, 3}));
}

TEST(Plan, SingleMicPairsWithItself) {
  const auto p = vme::plan_virtual_mics(1, 8);
  EXPECT_EQ(p.pairs, (Pairs{{0, 0}}));
  EXPECT_EQ(p.counts, (std::vector<std::size_t>{7}));
}

TEST(Plan, AgreesWithOracleForAllSizes) {
  for (std::size_t m = 1; m <= 16; ++m)
    for (std::size_t c = 1; c <= m; ++c) {
      const auto p = vme::plan_virtual_mics(c, m);
      const auto o = arraysep::verify::vme_oracle(c, m);
      EXPECT_EQ(p.pairs, o.pairs);
      EXPECT_EQ(p.counts, o.counts);
      ASSERT_EQ(p.virtual_mics.size(), o.alphas.size());
      for (std::size_t i = 0; i < o.alphas.size(); ++i) EXPECT_EQ(p.virtual_mics[i].alpha, o.alphas[i]);
    }
}

TEST(Plan, InvalidSizesThrow) {
  EXPECT_THROW(vme::plan_virtual_mics(0, 8), std::invalid_argument);
  EXPECT_THROW(vme::plan_virtual_mics(9, 8), std::invalid_argument);
}

TEST(Interpolate, GeometricMagnitudeAndMidpointPhase) {
  const C v = vme::interpolate_bin(C(1.0, 0.0), C(0.0, 4.0), 0.5);
  EXPECT_NEAR(v.real(), std::numbers::sqrt2, 1e-14);
  EXPECT_NEAR(v.imag(), std::numbers::sqrt2, 1e-14);
}

TEST(Interpolate, EndpointsAndEqualInputsAreExact) {
  const C a(0.3, -1.7), b(-2.0, 0.4);
  EXPECT_EQ(vme::interpolate_bin(a, b, 0.0), a);
  EXPECT_EQ(vme::interpolate_bin(a, b, 1.0), b);
  EXPECT_EQ(vme::interpolate_bin(a, a, 0.37), a);
  EXPECT_EQ(vme::interpolate_bin(C(0.0, 0.0), b, 0.5), C(0.0, 0.0));
}

TEST(Interpolate, TakesTheShortArc) {
  // arguments +170 and -170 degrees: the midpoint is 180, not 0
  const C a = std::polar(1.0, 170.0 * std::numbers::pi / 180.0);
  const C b = std::polar(1.0, -170.0 * std::numbers::pi / 180.0);
  const C v = vme::interpolate_bin(a, b, 0.5);
  EXPECT_NEAR(v.real(), -1.0, 1e-12);
  EXPECT_NEAR(v.imag(), 0.0, 1e-12);
}

TEST(Augment, RealChannelsCopiedAndVirtualFollowThePlan) {
  const auto s = random_spec(4, 5, 3, 1);
  const auto a = vme::augment_channels(s, 8, vme::AugmentMode::kVme);
  ASSERT_EQ(a.channels, 8u);
  const auto plan = vme::plan_virtual_mics(3, 8);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t f = 0; f < 5; ++f) {
      for (std::size_t c = 0; c < 3; ++c) ASSERT_EQ(a.at(t, f, c), s.at(t, f, c));
      for (std::size_t v = 0; v < plan.virtual_mics.size(); ++v) {
        const auto& vm = plan.virtual_mics[v];
        ASSERT_EQ(a.at(t, f, 3 + v), vme::interpolate_bin(s.at(t, f, vm.first), s.at(t, f, vm.second), vm.alpha));
      }
    }
}

TEST(Augment, ZeroPadFillsWithZeros) {
  const auto s = random_spec(2, 3, 2, 2);
  const auto a = vme::augment_channels(s, 8, vme::AugmentMode::kZeroPad);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t f = 0; f < 3; ++f) {
      for (std::size_t c = 0; c < 2; ++c) ASSERT_EQ(a.at(t, f, c), s.at(t, f, c));
      for (std::size_t c = 2; c < 8; ++c) ASSERT_EQ(a.at(t, f, c), C(0.0, 0.0));
    }
}

TEST(Augment, SingleChannelReplicatesExactly) {
  const auto s = random_spec(3, 4, 1, 3);
  const auto a = vme::augment_channels(s, 8, vme::AugmentMode::kVme);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t f = 0; f < 4; ++f)
      for (std::size_t c = 0; c < 8; ++c) ASSERT_EQ(a.at(t, f, c), s.at(t, f, 0));
}

TEST(Augment, FullArrayIsUnchangedAndTooManyThrows) {
  const auto s = random_spec(2, 2, 8, 4);
  EXPECT_EQ(vme::augment_channels(s, 8, vme::AugmentMode::kVme).data, s.data);
  EXPECT_THROW(vme::augment_channels(random_spec(2, 2, 9, 5), 8, vme::AugmentMode::kVme), std::invalid_argument);
}

TEST(Augment, ModeNames) {
  EXPECT_EQ(vme::parse_augment_mode("zero_pad"), vme::AugmentMode::kZeroPad);
  EXPECT_EQ(vme::to_string(vme::AugmentMode::kVme), "vme");
  EXPECT_THROW(vme::parse_augment_mode("nope"), std::invalid_argument);
}
