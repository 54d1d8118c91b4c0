// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/sim/rir.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "arraysep/dsp/fft.h"

namespace arraysep::sim {

namespace {

constexpr double kMinSourceDistance = 1e-3;

bool inside(const Point3& p, const Point3& room) {
  for (int k = 0; k < 3; ++k) {
    if (!(p[k] > 0.0 && p[k] < room[k])) return false;
  }
  return true;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Allen and Berkley's DC-blocking filter: a double pole at exp(-w) and a
// double zero at 1, unit gain at the first sample.
void highpass(std::vector<double>& h, double cutoff_hz, double fs) {
  const double w = 2.0 * std::numbers::pi * cutoff_hz / fs;
  const double r = std::exp(-w);
  const double b1 = 2.0 * r * std::cos(w), b2 = -r * r, a1 = -(1.0 + r);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& x : h) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + x;
    x = y0 + a1 * y1 + r * y2;
  }
}

}  // namespace

double reflection_coefficient(const Point3& room_dims_m, double t60_s,
                              double sound_speed) {
  if (!(t60_s > 0.0)) throw std::invalid_argument("t60 must be positive");
  for (double d : room_dims_m) {
    if (!(d > 0.0)) throw std::invalid_argument("room dimensions must be positive");
  }
  // An image reached along unit direction u after path length r has met
  // r * k(u) walls, k(u) = sum |u_i| / L_i. Image density cancels the 1/r^2
  // spreading, so the energy envelope is the direction average of
  // beta^(2 c t k(u)). Its Schroeder curve only depends on -ln(beta) * t, so
  // the T30 slope is computed once at ln(beta) = -1 and rescaled.
  constexpr int kGrid = 96;
  std::vector<double> rate;  // a_u at ln(beta) = -1
  rate.reserve(kGrid * kGrid);
  for (int i = 0; i < kGrid; ++i) {
    const double uz = (i + 0.5) / kGrid;  // uniform in cos(theta): equal-area cells
    const double s = std::sqrt(1.0 - uz * uz);
    for (int j = 0; j < kGrid; ++j) {
      const double phi = 0.5 * std::numbers::pi * (j + 0.5) / kGrid;
      const double k = s * std::cos(phi) / room_dims_m[0] + s * std::sin(phi) / room_dims_m[1] +
                       uz / room_dims_m[2];
      rate.push_back(2.0 * sound_speed * k);
    }
  }
  const auto edc = [&](double t) {
    double e = 0.0;
    for (double a : rate) e += std::exp(-a * t) / a;
    return e;
  };
  const double e0 = edc(0.0);
  const auto crossing = [&](double db) {
    const double target = e0 * std::pow(10.0, db / 10.0);
    double lo = 0.0, hi = 1e-3;
    while (edc(hi) > target) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (edc(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double t60_unit = 2.0 * (crossing(-35.0) - crossing(-5.0));
  return std::exp(-t60_unit / t60_s);
}

std::vector<std::vector<double>> simulate_rir(const Point3& room_dims_m,
                                              const Point3& source_pos,
                                              const ArrayGeometry& geometry,
                                              double t60_s,
                                              const RirOptions& options) {
  geometry.validate();
  for (double d : room_dims_m) {
    if (!(d > 0.0)) throw std::invalid_argument("room dimensions must be positive");
  }
  if (!inside(source_pos, room_dims_m)) {
    throw std::invalid_argument("source lies outside the room");
  }
  for (std::size_t m = 0; m < geometry.size(); ++m) {
    if (!inside(geometry.mic_positions[m], room_dims_m)) {
      throw std::invalid_argument("mic " + std::to_string(m) +
                                  " lies outside the room");
    }
    if (distance(geometry.mic_positions[m], source_pos) < kMinSourceDistance) {
      throw std::invalid_argument("mic " + std::to_string(m) +
                                  " coincides with the source");
    }
  }

  const double fs = options.sample_rate;
  const double c = options.sound_speed;
  const double beta = reflection_coefficient(room_dims_m, t60_s, c);
  const int taps = 2 * static_cast<int>(std::lround(0.004 * fs));

  std::size_t length = options.length;
  if (length == 0) length = static_cast<std::size_t>(std::ceil(t60_s * fs));
  const double max_dist = static_cast<double>(length) / fs * c;

  std::array<int, 3> bound{};
  for (int k = 0; k < 3; ++k) {
    bound[k] = static_cast<int>(std::ceil(max_dist / (2.0 * room_dims_m[k]))) + 1;
    if (options.max_order >= 0) bound[k] = std::min(bound[k], options.max_order + 1);
  }

  struct Image {
    double delay;  // samples
    double gain;
  };
  std::vector<std::vector<Image>> images(geometry.size());
  double last_arrival = 0.0;

  for (int l = -bound[0]; l <= bound[0]; ++l)
    for (int m = -bound[1]; m <= bound[1]; ++m)
      for (int n = -bound[2]; n <= bound[2]; ++n)
        for (int u = 0; u < 2; ++u)
          for (int v = 0; v < 2; ++v)
            for (int w = 0; w < 2; ++w) {
              const int order = std::abs(2 * l - u) + std::abs(2 * m - v) +
                                std::abs(2 * n - w);
              if (options.max_order >= 0 && order > options.max_order) continue;
              const Point3 img{
                  2.0 * l * room_dims_m[0] + (1 - 2 * u) * source_pos[0],
                  2.0 * m * room_dims_m[1] + (1 - 2 * v) * source_pos[1],
                  2.0 * n * room_dims_m[2] + (1 - 2 * w) * source_pos[2]};
              const double gain_refl = std::pow(beta, order);
              for (std::size_t mic = 0; mic < geometry.size(); ++mic) {
                const double d = distance(img, geometry.mic_positions[mic]);
                if (d > max_dist) continue;
                const double delay = d / c * fs;
                images[mic].push_back(
                    {delay, gain_refl / (4.0 * std::numbers::pi * d)});
                last_arrival = std::max(last_arrival, delay);
              }
            }

  if (options.max_order >= 0 && options.length == 0) {
    length = std::min(length, static_cast<std::size_t>(std::ceil(last_arrival)) +
                                  static_cast<std::size_t>(taps / 2) + 1);
  }

  std::vector<std::vector<double>> rirs(geometry.size(),
                                        std::vector<double>(length, 0.0));
  for (std::size_t mic = 0; mic < geometry.size(); ++mic) {
    auto& h = rirs[mic];
    for (const auto& im : images[mic]) {
      const double whole = std::floor(im.delay);
      const double frac = im.delay - whole;
      const long start = static_cast<long>(whole) - taps / 2;
      for (int k = 0; k <= taps; ++k) {
        const long idx = start + k;
        if (idx < 0) continue;
        if (idx >= static_cast<long>(length)) break;
        const double t = static_cast<double>(k - taps / 2) - frac;
        const double window = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * t / taps));
        const double sinc =
            t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
        h[static_cast<std::size_t>(idx)] += im.gain * window * sinc;
      }
    }
  }
  if (options.highpass_hz > 0.0) {
    for (auto& h : rirs) highpass(h, options.highpass_hz, fs);
  }
  return rirs;
}

std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& kernel) {
  if (signal.empty() || kernel.empty()) return {};
  const std::size_t out_len = signal.size() + kernel.size() - 1;
  const std::size_t n = next_pow2(out_len);
  dsp::RealFft fft(std::max<std::size_t>(n, 2));
  std::vector<double> a(fft.size(), 0.0), b(fft.size(), 0.0);
  std::copy(signal.begin(), signal.end(), a.begin());
  std::copy(kernel.begin(), kernel.end(), b.begin());
  std::vector<std::complex<double>> fa(fft.num_bins()), fb(fft.num_bins());
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa, a);
  a.resize(out_len);
  return a;
}

}  // namespace arraysep::sim
