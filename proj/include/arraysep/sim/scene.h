// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arraysep/dsp/wav.h"
#include "arraysep/sim/geometry.h"

namespace arraysep::sim {

// Scene parameters. Unset optionals are drawn from the training ranges:
// t60 in [0.1, 1.0] s, SNR in [10, 20] dB, overlap in [0.1, 1.0], room in
// [4,8] x [4,8] x [2.5,3.5] m.
struct SceneParams {
  std::optional<double> t60_s;
  std::optional<double> snr_db;
  std::optional<double> overlap_ratio;
  std::optional<Point3> room_dims_m;
  std::optional<Point3> array_center;
  // One entry per source when set.
  std::vector<Point3> source_positions;
  bool add_noise = true;
  int max_order = 6;
  double wall_margin_m = 0.5;
};

struct MixtureScene {
  dsp::Waveform mixture;               // C channels
  std::vector<dsp::Waveform> targets;  // K mono reverberant images at mic 0
  std::vector<dsp::Waveform> images;   // K x C-channel reverberant images
  dsp::Waveform noise;                 // C channels, zero when disabled
  ArrayGeometry geometry;              // absolute positions in the room
  std::vector<std::size_t> offsets;    // per-source start sample
  double t60_s = 0.0;
  double snr_db = 0.0;
  double overlap_ratio = 1.0;
  Point3 room_dims_m{};
  std::uint64_t seed = 0;

  std::size_t num_speakers() const { return targets.size(); }
};

// Convolves each mono source with its RIRs, delays sources 1..K-1 by
// round((1 - overlap) * len(source 0)), sums, and adds diffuse-like noise
// scaled to the requested mixture-to-noise ratio over all channels.
// `geometry` is centered at the origin and is placed in the room here.
MixtureScene synth_scene(std::span<const dsp::Waveform> sources,
                         const ArrayGeometry& geometry,
                         const SceneParams& params, std::uint64_t seed);

// New channel i is old channel permutation[i]; targets are re-derived from
// the images so that the reference stays at channel 0.
MixtureScene permute_channels(const MixtureScene& scene,
                              std::span<const std::size_t> permutation);

dsp::Waveform permute_channels(const dsp::Waveform& wave,
                               std::span<const std::size_t> permutation);

// Amplitude-modulated harmonic complex with a gliding pitch, syllabic
// envelope, and interleaved noise bursts. Peak-normalized to 0.5.
dsp::Waveform speech_like_source(double duration_s, int sample_rate,
                                 std::uint64_t seed);

// Per-channel independent pink noise through random first-order all-pass
// cascades. Unit RMS per channel.
dsp::Waveform diffuse_noise(std::size_t channels, std::size_t samples,
                            int sample_rate, std::uint64_t seed);

double energy(const dsp::Waveform& wave);

// --- manifest -------------------------------------------------------------

// One record per scene in a plain-text key=value file. Records start with a
// `scene=<id>` line; paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string id;
  std::uint64_t seed = 0;
  std::string geometry;
  double t60_s = 0.0;
  double snr_db = 0.0;
  double overlap_ratio = 0.0;
  std::string mixture;
  std::vector<std::string> targets;
};

void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace arraysep::sim
