// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "arraysep/sim/dataset.h"
#include "arraysep/sim/geometry.h"
#include "arraysep/sim/rir.h"
#include "arraysep/sim/scene.h"

namespace sim = arraysep::sim;
namespace dsp = arraysep::dsp;

namespace {

sim::ArrayGeometry single_mic(const sim::Point3& p) { return {{p}, "probe"}; }

std::size_t argmax_abs(const std::vector<double>& h) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (std::abs(h[i]) > std::abs(h[best])) best = i;
  }
  return best;
}

// T30 from the Schroeder backward integral, extrapolated to 60 dB.
double schroeder_t60(const std::vector<double>& h, double fs) {
  std::vector<double> edc(h.size());
  double acc = 0.0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    edc[i] = acc;
  }
  const double total = edc[0];
  auto cross = [&](double db) {
    for (std::size_t i = 0; i < edc.size(); ++i) {
      if (10.0 * std::log10(edc[i] / total) <= db) return static_cast<double>(i);
    }
    return static_cast<double>(edc.size());
  };
  return 2.0 * (cross(-35.0) - cross(-5.0)) / fs;
}

std::vector<dsp::Waveform> two_sources(double seconds) {
  return {sim::speech_like_source(seconds, 16000, 1), sim::speech_like_source(seconds, 16000, 2)};
}

}  // namespace

TEST(Geometry, CircularChordAndDiameter) {
  const auto g = sim::geometry_from_label("C-8-5");
  ASSERT_EQ(g.size(), 8u);
  EXPECT_NEAR(g.mic_positions[0][0], 0.05, 1e-15);
  EXPECT_NEAR(g.mic_positions[0][1], 0.0, 1e-15);
  // adjacent chord 2 r sin(pi / 8)
  EXPECT_NEAR(sim::distance(g.mic_positions[0], g.mic_positions[1]), 0.0382683, 1e-6);
  EXPECT_NEAR(sim::distance(g.mic_positions[0], g.mic_positions[4]), 0.10, 1e-12);
}

TEST(Geometry, LinearSpacingIsCentered) {
  const auto g = sim::geometry_from_label("L-2-10");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g.mic_positions[0][0], -0.05, 1e-15);
  EXPECT_NEAR(g.mic_positions[1][0], 0.05, 1e-15);
  EXPECT_NEAR(sim::distance(g.mic_positions[0], g.mic_positions[1]), 0.10, 1e-15);
}

TEST(Geometry, SingleMicSitsOnTheXAxis) {
  const auto g = sim::circular_array(1, 0.05);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.mic_positions[0], (sim::Point3{0.05, 0.0, 0.0}));
}

TEST(Geometry, SubsetSelectors) {
  const auto pair = sim::geometry_from_label("C-8-5{0,4}");
  ASSERT_EQ(pair.size(), 2u);
  EXPECT_NEAR(sim::distance(pair.mic_positions[0], pair.mic_positions[1]), 0.10, 1e-12);

  const auto square = sim::geometry_from_label("C-8-5{0,2,4,6}");
  ASSERT_EQ(square.size(), 4u);
  const double side = 0.05 * std::numbers::sqrt2;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(sim::distance(square.mic_positions[i], square.mic_positions[(i + 1) % 4]), side, 1e-12);
  }
  EXPECT_EQ(sim::geometry_from_label("C-8-5{0,3,5}").size(), 3u);
}

TEST(Geometry, BadLabelsThrow) {
  EXPECT_THROW(sim::geometry_from_label("X-2-5"), std::invalid_argument);
  EXPECT_THROW(sim::geometry_from_label("C-8-5{0,8}"), std::out_of_range);
  EXPECT_THROW(sim::geometry_from_label("C-0-5"), std::invalid_argument);
  EXPECT_THROW(sim::geometry_from_label("C-8-5{1,1}"), std::invalid_argument);
}

TEST(Geometry, PermutationChecks) {
  const std::vector<std::size_t> bad = {0, 0, 1};
  EXPECT_THROW(sim::check_permutation(bad, 3), std::invalid_argument);
  const std::vector<std::size_t> good = {2, 0, 1};
  EXPECT_NO_THROW(sim::check_permutation(good, 3));
}

TEST(Rir, FreeFieldDirectPathDelay) {
  const sim::Point3 room{6.0, 5.0, 3.0};
  const sim::Point3 mic{3.0, 2.5, 1.5};
  sim::RirOptions opt;
  opt.max_order = 0;
  for (const auto& [dist, sample] : {std::pair{0.343, 16u}, std::pair{0.686, 32u}}) {
    const sim::Point3 src{3.0 + dist, 2.5, 1.5};
    const auto h = sim::simulate_rir(room, src, single_mic(mic), 0.5, opt);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(argmax_abs(h[0]), sample);
    EXPECT_NEAR(h[0][sample], 1.0 / (4.0 * std::numbers::pi * dist), 1e-6);
  }
}

TEST(Rir, SchroederDecayMatchesRequestedT60) {
  sim::RirOptions opt;
  opt.max_order = -1;
  for (const sim::Point3& room : {sim::Point3{6.0, 5.0, 3.0}, sim::Point3{4.0, 4.0, 2.5}, sim::Point3{8.0, 7.5, 3.5}}) {
    for (double t60 : {0.3, 1.0}) {
      const sim::Point3 src{0.3 * room[0], 0.35 * room[1], 1.3};
      const auto h = sim::simulate_rir(room, src, single_mic({0.7 * room[0], 0.6 * room[1], 1.5}), t60, opt);
      const double measured = schroeder_t60(h[0], 16000.0);
      EXPECT_NEAR(measured, t60, 0.2 * t60) << "room " << room[0] << "x" << room[1] << " t60 " << t60;
    }
  }
}

TEST(Rir, HighpassRemovesTheDcTail) {
  const sim::Point3 room{6.0, 5.0, 3.0};
  sim::RirOptions opt;
  opt.max_order = -1;
  const auto h = sim::simulate_rir(room, {2.0, 1.7, 1.4}, single_mic({4.1, 3.2, 1.6}), 0.6, opt);
  double dc = 0.0;
  for (double x : h[0]) dc += x;
  EXPECT_NEAR(dc, 0.0, 1e-3);
}

TEST(Rir, ConvolveMatchesDirectSum) {
  const std::vector<double> a = {1.0, -2.0, 0.5, 3.0};
  const std::vector<double> b = {0.25, 1.0, -1.0};
  const auto y = sim::convolve(a, b);
  ASSERT_EQ(y.size(), 6u);
  for (std::size_t n = 0; n < y.size(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (n >= i && n - i < b.size()) s += a[i] * b[n - i];
    }
    EXPECT_NEAR(y[n], s, 1e-12);
  }
}

TEST(Rir, SourceOutsideRoomThrows) {
  EXPECT_THROW(sim::simulate_rir({4, 4, 3}, {5, 1, 1}, single_mic({1, 1, 1}), 0.3), std::invalid_argument);
}

TEST(Scene, FullOverlapHasZeroOffsets) {
  sim::SceneParams p;
  p.overlap_ratio = 1.0;
  p.t60_s = 0.2;
  p.snr_db = 15.0;
  const auto s = sim::synth_scene(two_sources(0.5), sim::geometry_from_label("L-2-5"), p, 3);
  EXPECT_EQ(s.offsets, (std::vector<std::size_t>{0, 0}));
}

TEST(Scene, PartialOverlapDelaysSecondSource) {
  sim::SceneParams p;
  p.overlap_ratio = 0.5;
  p.t60_s = 0.2;
  const auto s = sim::synth_scene(two_sources(0.5), sim::geometry_from_label("L-2-5"), p, 3);
  EXPECT_EQ(s.offsets[1], 4000u);
}

TEST(Scene, MixtureIsSumOfImagesAndNoiseAtRequestedSnr) {
  sim::SceneParams p;
  p.snr_db = 12.5;
  p.t60_s = 0.3;
  const auto s = sim::synth_scene(two_sources(0.5), sim::geometry_from_label("C-8-5{0,3,5}"), p, 4);
  ASSERT_EQ(s.mixture.num_channels(), 3u);
  dsp::Waveform clean(16000, 3, s.mixture.num_samples());
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t n = 0; n < s.mixture.num_samples(); ++n) {
      const double sum = s.images[0].channels[c][n] + s.images[1].channels[c][n];
      clean.channels[c][n] = sum;
      ASSERT_NEAR(s.mixture.channels[c][n], sum + s.noise.channels[c][n], 1e-12);
    }
  }
  EXPECT_NEAR(10.0 * std::log10(sim::energy(clean) / sim::energy(s.noise)), 12.5, 0.1);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(s.targets[k].channels[0], s.images[k].channels[0]);
}

TEST(Scene, SingleMicSingleSourceWithoutNoise) {
  sim::SceneParams p;
  p.add_noise = false;
  p.t60_s = 0.2;
  const std::vector<dsp::Waveform> src = {sim::speech_like_source(0.3, 16000, 9)};
  const auto s = sim::synth_scene(src, sim::circular_array(1, 0.05), p, 5);
  ASSERT_EQ(s.num_speakers(), 1u);
  EXPECT_EQ(s.mixture.channels[0], s.targets[0].channels[0]);
  EXPECT_EQ(sim::energy(s.noise), 0.0);
}

TEST(Scene, PermuteAndInverseRestoreTheScene) {
  sim::SceneParams p;
  p.t60_s = 0.2;
  const auto s = sim::synth_scene(two_sources(0.3), sim::geometry_from_label("C-8-5{0,2,4,6}"), p, 6);
  const std::vector<std::size_t> id = {0, 1, 2, 3};
  const auto same = sim::permute_channels(s, id);
  EXPECT_EQ(same.mixture.channels, s.mixture.channels);

  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  std::vector<std::size_t> inv(4);
  for (std::size_t i = 0; i < 4; ++i) inv[perm[i]] = i;
  const auto moved = sim::permute_channels(s, perm);
  EXPECT_EQ(moved.mixture.channels[0], s.mixture.channels[2]);
  EXPECT_EQ(moved.targets[0].channels[0], s.images[0].channels[2]);
  const auto back = sim::permute_channels(moved, inv);
  EXPECT_EQ(back.mixture.channels, s.mixture.channels);
  EXPECT_EQ(back.targets[1].channels, s.targets[1].channels);
  EXPECT_EQ(back.geometry.mic_positions, s.geometry.mic_positions);
}

TEST(Scene, OutOfRangeParametersThrow) {
  sim::SceneParams p;
  p.t60_s = 2.0;
  EXPECT_THROW(sim::synth_scene(two_sources(0.2), sim::geometry_from_label("L-2-5"), p, 1),
               std::invalid_argument);
}

TEST(Scene, DiffuseNoiseHasUnitRms) {
  const auto n = sim::diffuse_noise(3, 16000, 16000, 7);
  for (const auto& ch : n.channels) {
    double e = 0.0;
    for (double x : ch) e += x * x;
    EXPECT_NEAR(std::sqrt(e / 16000.0), 1.0, 1e-9);
  }
}

TEST(Manifest, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "arraysep_test_sim_manifest.txt";
  std::vector<sim::ManifestEntry> entries(2);
  entries[0] = {"scene_000", 42, "C-8-5{0,4}", 0.4, 13.0, 0.7, "a_mix.wav", {"a_s0.wav", "a_s1.wav"}};
  entries[1] = {"scene_001", 43, "L-2-5", 0.25, 19.5, 1.0, "b_mix.wav", {"b_s0.wav", "b_s1.wav", "b_s2.wav"}};
  sim::write_manifest(path, entries);
  const auto back = sim::read_manifest(path);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].id, entries[i].id);
    EXPECT_EQ(back[i].seed, entries[i].seed);
    EXPECT_EQ(back[i].geometry, entries[i].geometry);
    EXPECT_DOUBLE_EQ(back[i].t60_s, entries[i].t60_s);
    EXPECT_DOUBLE_EQ(back[i].snr_db, entries[i].snr_db);
    EXPECT_DOUBLE_EQ(back[i].overlap_ratio, entries[i].overlap_ratio);
    EXPECT_EQ(back[i].mixture, entries[i].mixture);
    EXPECT_EQ(back[i].targets, entries[i].targets);
  }
}

TEST(Dataset, SameSeedSameScenes) {
  sim::DatasetSpec spec;
  spec.num_scenes = 2;
  spec.duration_s = 0.3;
  const auto a = sim::synth_dataset(spec);
  const auto b = sim::synth_dataset(spec);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a[i].mixture.channels, b[i].mixture.channels);
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
  EXPECT_NE(a[0].mixture.channels, a[1].mixture.channels);
  spec.seed = 101;
  EXPECT_NE(sim::synth_dataset(spec)[0].mixture.channels, a[0].mixture.channels);
}
