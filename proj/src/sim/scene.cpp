// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/sim/scene.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "arraysep/sim/rir.h"

namespace arraysep::sim {

namespace {

void check_range(const char* name, double value, double lo, double hi) {
  if (!(value >= lo && value <= hi)) {
    std::ostringstream os;
    os << name << " = " << value << " outside [" << lo << ", " << hi << "]";
    throw std::invalid_argument(os.str());
  }
}

double array_extent(const ArrayGeometry& g) {
  double r = 0.0;
  for (const auto& p : g.mic_positions) r = std::max(r, distance(p, {0, 0, 0}));
  return r;
}

Point3 uniform_point(std::mt19937_64& rng, const Point3& room, double margin,
                     double z_lo, double z_hi) {
  std::uniform_real_distribution<double> ux(margin, room[0] - margin);
  std::uniform_real_distribution<double> uy(margin, room[1] - margin);
  std::uniform_real_distribution<double> uz(std::max(z_lo, margin),
                                            std::min(z_hi, room[2] - margin));
  const double x = ux(rng);
  const double y = uy(rng);
  return {x, y, uz(rng)};
}

}  // namespace

double energy(const dsp::Waveform& wave) {
  double e = 0.0;
  for (const auto& ch : wave.channels)
    for (double x : ch) e += x * x;
  return e;
}

dsp::Waveform speech_like_source(double duration_s, int sample_rate,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  const double fs = sample_rate;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double f0_base = 90.0 + 160.0 * u01(rng);
  const double glide_rate = 0.5 + 1.5 * u01(rng);
  const double glide_depth = 0.1 + 0.15 * u01(rng);
  const double syllable_rate = 3.0 + 3.0 * u01(rng);
  const double syllable_phase = 2.0 * std::numbers::pi * u01(rng);
  const int harmonics = 12;
  std::vector<double> harmonic_gain(harmonics);
  // Two formant-like bumps on the harmonic amplitudes.
  const double formant1 = 400.0 + 500.0 * u01(rng);
  const double formant2 = 1100.0 + 1200.0 * u01(rng);

  std::vector<double> x(n, 0.0);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double f0 =
        f0_base * (1.0 + glide_depth * std::sin(2.0 * std::numbers::pi * glide_rate * t));
    phase += 2.0 * std::numbers::pi * f0 / fs;
    const double env = std::pow(
        std::max(0.0, std::sin(2.0 * std::numbers::pi * syllable_rate * t + syllable_phase)),
        0.7);
    double voiced = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      const double fh = h * f0;
      if (fh > 0.45 * fs) break;
      const double g = std::exp(-std::pow((fh - formant1) / 300.0, 2)) +
                       0.6 * std::exp(-std::pow((fh - formant2) / 500.0, 2)) +
                       0.05 / h;
      voiced += g * std::sin(h * phase);
    }
    x[i] = env * voiced;
  }

  // Fricative-like noise bursts in the syllable gaps.
  const std::size_t burst_len = static_cast<std::size_t>(0.06 * fs);
  const std::size_t bursts = std::max<std::size_t>(1, static_cast<std::size_t>(duration_s * 2.0));
  for (std::size_t b = 0; b < bursts && n > burst_len; ++b) {
    const auto start = static_cast<std::size_t>(u01(rng) * static_cast<double>(n - burst_len));
    double prev = 0.0;
    for (std::size_t k = 0; k < burst_len; ++k) {
      const double w = std::sin(std::numbers::pi * static_cast<double>(k) / burst_len);
      const double white = gauss(rng);
      const double hp = white - 0.9 * prev;  // crude high-pass tilt
      prev = white;
      x[start + k] += 0.15 * w * hp;
    }
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : x) v *= 0.5 / peak;
  }
  return dsp::Waveform::mono(sample_rate, std::move(x));
}

dsp::Waveform diffuse_noise(std::size_t channels, std::size_t samples,
                            int sample_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-0.7, 0.7);
  dsp::Waveform out(sample_rate, channels, samples);
  for (std::size_t c = 0; c < channels; ++c) {
    // Paul Kellet's economy pink filter.
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    auto& y = out.channels[c];
    for (std::size_t i = 0; i < samples; ++i) {
      const double white = gauss(rng);
      b0 = 0.99765 * b0 + white * 0.0990460;
      b1 = 0.96300 * b1 + white * 0.2965164;
      b2 = 0.57000 * b2 + white * 1.0526913;
      y[i] = b0 + b1 + b2 + white * 0.1848;
    }
    for (int stage = 0; stage < 2; ++stage) {
      const double a = coef(rng);
      double x_prev = 0.0, y_prev = 0.0;
      for (std::size_t i = 0; i < samples; ++i) {
        const double x = y[i];
        const double v = a * x + x_prev - a * y_prev;
        x_prev = x;
        y_prev = v;
        y[i] = v;
      }
    }
    double e = 0.0;
    for (double v : y) e += v * v;
    const double rms = std::sqrt(e / static_cast<double>(std::max<std::size_t>(samples, 1)));
    if (rms > 0.0) {
      for (double& v : y) v /= rms;
    }
  }
  return out;
}

MixtureScene synth_scene(std::span<const dsp::Waveform> sources,
                         const ArrayGeometry& geometry,
                         const SceneParams& params, std::uint64_t seed) {
  if (sources.empty()) throw std::invalid_argument("synth_scene: no sources");
  geometry.validate();
  const int fs = sources.front().sample_rate;
  for (const auto& s : sources) {
    if (s.num_channels() != 1 || s.num_samples() == 0) {
      throw std::invalid_argument("synth_scene: sources must be non-empty mono");
    }
    if (s.sample_rate != fs) {
      throw std::invalid_argument("synth_scene: sources differ in sample rate");
    }
  }
  if (!params.source_positions.empty() &&
      params.source_positions.size() != sources.size()) {
    throw std::invalid_argument("synth_scene: one position per source required");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  MixtureScene scene;
  scene.seed = seed;
  scene.t60_s = params.t60_s.value_or(0.1 + 0.9 * u01(rng));
  scene.snr_db = params.snr_db.value_or(10.0 + 10.0 * u01(rng));
  scene.overlap_ratio = params.overlap_ratio.value_or(0.1 + 0.9 * u01(rng));
  if (params.room_dims_m) {
    scene.room_dims_m = *params.room_dims_m;
  } else {
    const double x = 4.0 + 4.0 * u01(rng);
    const double y = 4.0 + 4.0 * u01(rng);
    scene.room_dims_m = {x, y, 2.5 + u01(rng)};
  }
  check_range("t60_s", scene.t60_s, 0.1, 1.0);
  check_range("snr_db", scene.snr_db, 10.0, 20.0);
  check_range("overlap_ratio", scene.overlap_ratio, 0.1, 1.0);

  const Point3& room = scene.room_dims_m;
  const Point3 center =
      params.array_center
          ? *params.array_center
          : uniform_point(rng, room, params.wall_margin_m + array_extent(geometry),
                          1.0, 1.6);
  scene.geometry = translate(geometry, center);

  std::vector<Point3> positions = params.source_positions;
  while (positions.size() < sources.size()) {
    Point3 p{};
    for (int attempt = 0; attempt < 1000; ++attempt) {
      p = uniform_point(rng, room, params.wall_margin_m, 1.2, 1.9);
      if (distance(p, center) > 0.5) break;
    }
    positions.push_back(p);
  }

  const std::size_t k_count = sources.size();
  const std::size_t channels = geometry.size();
  RirOptions rir_opts;
  rir_opts.sample_rate = fs;
  rir_opts.max_order = params.max_order;

  std::vector<std::vector<std::vector<double>>> wet(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto rirs = simulate_rir(room, positions[k], scene.geometry,
                                   scene.t60_s, rir_opts);
    for (std::size_t c = 0; c < channels; ++c) {
      wet[k].push_back(convolve(sources[k].channels[0], rirs[c]));
    }
  }

  const std::size_t first_len = sources[0].num_samples();
  const auto offset = static_cast<std::size_t>(
      std::lround((1.0 - scene.overlap_ratio) * static_cast<double>(first_len)));
  std::size_t total = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    scene.offsets.push_back(k == 0 ? 0 : offset);
    total = std::max(total, scene.offsets[k] + wet[k][0].size());
  }

  scene.mixture = dsp::Waveform(fs, channels, total);
  for (std::size_t k = 0; k < k_count; ++k) {
    dsp::Waveform image(fs, channels, total);
    for (std::size_t c = 0; c < channels; ++c) {
      const auto& src = wet[k][c];
      std::copy(src.begin(), src.end(),
                image.channels[c].begin() + static_cast<long>(scene.offsets[k]));
      for (std::size_t n = 0; n < total; ++n) {
        scene.mixture.channels[c][n] += image.channels[c][n];
      }
    }
    scene.targets.push_back(dsp::Waveform::mono(fs, image.channels[0]));
    scene.images.push_back(std::move(image));
  }

  scene.noise = dsp::Waveform(fs, channels, total);
  if (params.add_noise) {
    std::uint64_t noise_seed = rng();
    scene.noise = diffuse_noise(channels, total, fs, noise_seed);
    const double signal_energy = energy(scene.mixture);
    const double noise_energy = energy(scene.noise);
    const double gain = std::sqrt(signal_energy /
                                  (noise_energy * std::pow(10.0, scene.snr_db / 10.0)));
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t n = 0; n < total; ++n) {
        scene.noise.channels[c][n] *= gain;
        scene.mixture.channels[c][n] += scene.noise.channels[c][n];
      }
    }
  }
  return scene;
}

dsp::Waveform permute_channels(const dsp::Waveform& wave,
                               std::span<const std::size_t> permutation) {
  check_permutation(permutation, wave.num_channels());
  dsp::Waveform out;
  out.sample_rate = wave.sample_rate;
  for (auto p : permutation) out.channels.push_back(wave.channels[p]);
  return out;
}

MixtureScene permute_channels(const MixtureScene& scene,
                              std::span<const std::size_t> permutation) {
  MixtureScene out = scene;
  out.mixture = permute_channels(scene.mixture, permutation);
  out.noise = permute_channels(scene.noise, permutation);
  out.geometry = permute_channels(scene.geometry, permutation);
  for (std::size_t k = 0; k < scene.images.size(); ++k) {
    out.images[k] = permute_channels(scene.images[k], permutation);
    out.targets[k] = dsp::Waveform::mono(scene.mixture.sample_rate,
                                         out.images[k].channels[0]);
  }
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestEntry> entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out.precision(17);
  out << "# arraysep scene manifest v1\n";
  for (const auto& e : entries) {
    out << "scene=" << e.id << "\n"
        << "seed=" << e.seed << "\n"
        << "geometry=" << e.geometry << "\n"
        << "t60=" << e.t60_s << "\n"
        << "snr=" << e.snr_db << "\n"
        << "overlap=" << e.overlap_ratio << "\n"
        << "mixture=" << e.mixture << "\n";
    for (std::size_t k = 0; k < e.targets.size(); ++k) {
      out << "target" << k << "=" << e.targets[k] << "\n";
    }
    out << "\n";
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "scene") {
      entries.emplace_back();
      entries.back().id = value;
      continue;
    }
    if (entries.empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": key before first scene= line");
    }
    auto& e = entries.back();
    if (key == "seed") e.seed = std::stoull(value);
    else if (key == "geometry") e.geometry = value;
    else if (key == "t60") e.t60_s = std::stod(value);
    else if (key == "snr") e.snr_db = std::stod(value);
    else if (key == "overlap") e.overlap_ratio = std::stod(value);
    else if (key == "mixture") e.mixture = value;
    else if (key.rfind("target", 0) == 0) {
      const std::size_t k = std::stoul(key.substr(6));
      if (e.targets.size() <= k) e.targets.resize(k + 1);
      e.targets[k] = value;
    } else {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }
  return entries;
}

}  // namespace arraysep::sim
