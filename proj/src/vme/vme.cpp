// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/vme/vme.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace arraysep::vme {

VmePlan plan_virtual_mics(std::size_t real_channels, std::size_t max_channels) {
  if (real_channels < 1 || real_channels > max_channels) {
    throw std::invalid_argument(
        "plan_virtual_mics: need 1 <= C <= M, got C=" +
        std::to_string(real_channels) + ", M=" + std::to_string(max_channels));
  }
  VmePlan plan;
  plan.real_channels = real_channels;
  plan.max_channels = max_channels;
  plan.num_virtual = max_channels - real_channels;
  plan.num_pairs = real_channels;

  const std::size_t base = plan.num_virtual / plan.num_pairs;
  const std::size_t extra = plan.num_virtual % plan.num_pairs;
  for (std::size_t i = 0; i < plan.num_pairs; ++i) {
    const std::size_t j = (i + 1) % real_channels;
    plan.pairs.emplace_back(i, j);
    plan.counts.push_back(base + (i < extra ? 1 : 0));
  }
  for (std::size_t p = 0; p < plan.num_pairs; ++p) {
    const std::size_t n = plan.counts[p];
    for (std::size_t k = 1; k <= n; ++k) {
      plan.virtual_mics.push_back({p, plan.pairs[p].first, plan.pairs[p].second,
                                   static_cast<double>(k) / static_cast<double>(n + 1)});
    }
  }
  return plan;
}

Complex interpolate_bin(Complex xi, Complex xj, double alpha) {
  if (alpha == 0.0 || xi == xj) return xi;
  if (alpha == 1.0) return xj;
  const double mi = std::abs(xi);
  const double mj = std::abs(xj);
  if (mi == 0.0 || mj == 0.0) return {0.0, 0.0};
  const double magnitude = std::pow(mi, 1.0 - alpha) * std::pow(mj, alpha);
  const double phase_i = std::arg(xi);
  double delta = std::arg(xj) - phase_i;
  // Wrap into (-pi, pi].
  delta = std::remainder(delta, 2.0 * std::numbers::pi);
  if (delta <= -std::numbers::pi) delta += 2.0 * std::numbers::pi;
  return std::polar(magnitude, phase_i + alpha * delta);
}

void interpolate_virtual(std::span<const Complex> xi, std::span<const Complex> xj,
                         double alpha, std::span<Complex> out) {
  if (xi.size() != xj.size() || out.size() != xi.size()) {
    throw std::invalid_argument("interpolate_virtual: size mismatch");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("interpolate_virtual: alpha outside [0, 1]");
  }
  for (std::size_t n = 0; n < xi.size(); ++n) out[n] = interpolate_bin(xi[n], xj[n], alpha);
}

AugmentMode parse_augment_mode(const std::string& text) {
  if (text == "vme") return AugmentMode::kVme;
  if (text == "zero_pad") return AugmentMode::kZeroPad;
  throw std::invalid_argument("unknown channel augmentation mode '" + text +
                              "' (expected vme or zero_pad)");
}

std::string to_string(AugmentMode mode) {
  return mode == AugmentMode::kVme ? "vme" : "zero_pad";
}

dsp::ComplexSpectrogram augment_channels(const dsp::ComplexSpectrogram& spec,
                                         std::size_t max_channels,
                                         AugmentMode mode) {
  const VmePlan plan = plan_virtual_mics(spec.channels, max_channels);
  dsp::ComplexSpectrogram out = spec.with_channels(max_channels);
  const std::size_t c_in = spec.channels;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) {
      const Complex* src = &spec.data[spec.index(t, f, 0)];
      Complex* dst = &out.data[out.index(t, f, 0)];
      for (std::size_t c = 0; c < c_in; ++c) dst[c] = src[c];
      if (mode == AugmentMode::kZeroPad) continue;  // already zero
      for (std::size_t v = 0; v < plan.virtual_mics.size(); ++v) {
        const auto& vm = plan.virtual_mics[v];
        dst[c_in + v] = interpolate_bin(src[vm.first], src[vm.second], vm.alpha);
      }
    }
  }
  return out;
}

}  // namespace arraysep::vme
