// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/train/loss.h"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "arraysep/dsp/fft.h"

namespace arraysep::train {

template <typename Real>
nn::Tensor<Real> istft_op(const nn::Tensor<Real>& packed, const dsp::StftConfig& config,
                          std::size_t num_samples) {
  config.validate();
  if (packed.rank() != 3 || packed.dim(2) % 2 != 0 || packed.dim(1) != config.num_bins()) {
    throw std::invalid_argument("istft_op: expected [T, " + std::to_string(config.num_bins()) +
                                ", 2K], got " + nn::to_string(packed.shape()));
  }
  const std::size_t frames = packed.dim(0), bins = packed.dim(1), k = packed.dim(2) / 2;
  const std::size_t win = config.window_length(), hop = config.hop(), half = win / 2;
  if (frames == 0) throw std::invalid_argument("istft_op: empty spectrogram");
  if (num_samples > (frames - 1) * hop + half) {
    throw std::invalid_argument("istft_op: requested length exceeds frame span");
  }

  const auto window = dsp::hann_window(win);
  const auto env = dsp::squared_window_envelope(frames, config);
  dsp::RealFft fft(win);
  std::vector<dsp::Complex> spectrum(bins);
  std::vector<double> frame(win), acc(env.size());
  std::vector<Real> out(k * num_samples);
  const auto v = packed.data();
  for (std::size_t s = 0; s < k; ++s) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < bins; ++f) {
        const std::size_t i = (t * bins + f) * 2 * k + 2 * s;
        spectrum[f] = {static_cast<double>(v[i]), static_cast<double>(v[i + 1])};
      }
      fft.inverse(spectrum, frame);
      for (std::size_t n = 0; n < win; ++n) acc[t * hop + n] += frame[n] * window[n];
    }
    for (std::size_t n = 0; n < num_samples; ++n) {
      const double e = env[n + half];
      out[s * num_samples + n] = static_cast<Real>(e > 1e-10 ? acc[n + half] / e : 0.0);
    }
  }

  return nn::Tensor<Real>::from_op(
      {k, num_samples}, std::move(out), {packed},
      [=](nn::Node<Real>& node) {
        Real* g = nn::parent_grad(node, 0);
        if (!g) return;
        dsp::RealFft fft(win);
        std::vector<double> ga(env.size()), gframe(win);
        std::vector<dsp::Complex> gspec(bins);
        const double inv_n = 1.0 / static_cast<double>(win);
        for (std::size_t s = 0; s < k; ++s) {
          std::fill(ga.begin(), ga.end(), 0.0);
          for (std::size_t n = 0; n < num_samples; ++n) {
            const double e = env[n + half];
            if (e > 1e-10) ga[n + half] = static_cast<double>(node.grad[s * num_samples + n]) / e;
          }
          for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t n = 0; n < win; ++n) gframe[n] = ga[t * hop + n] * window[n];
            fft.forward(gframe, gspec);
            for (std::size_t f = 0; f < bins; ++f) {
              const bool edge = f == 0 || 2 * f == win;
              const double c = (edge ? 1.0 : 2.0) * inv_n;
              const std::size_t i = (t * bins + f) * 2 * k + 2 * s;
              g[i] += static_cast<Real>(c * gspec[f].real());
              if (!edge) g[i + 1] += static_cast<Real>(c * gspec[f].imag());
            }
          }
        }
      });
}

template <typename Real>
nn::Tensor<Real> si_sdr_loss(const nn::Tensor<Real>& estimates,
                             const std::vector<std::vector<double>>& references,
                             const std::vector<std::size_t>& perm, double clamp_db) {
  if (estimates.rank() != 2 || estimates.dim(0) != references.size() || perm.size() != references.size()) {
    throw std::invalid_argument("si_sdr_loss: speaker count mismatch");
  }
  const std::size_t k = estimates.dim(0), len = estimates.dim(1);
  const double db = 10.0 / std::numbers::ln10;
  auto grads = std::make_shared<std::vector<double>>(k * len, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& s = references.at(perm[i]);
    if (s.size() != len) throw std::invalid_argument("si_sdr_loss: length mismatch");
    const Real* e = estimates.data().data() + i * len;
    double dot = 0.0, ss = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
      dot += static_cast<double>(e[n]) * s[n];
      ss += s[n] * s[n];
    }
    if (ss == 0.0) throw std::invalid_argument("si_sdr_loss: zero reference");
    const double alpha = dot / ss;
    const double a = dot * dot / ss;          // |alpha s|^2
    double b = 0.0;                           // |alpha s - e|^2
    for (std::size_t n = 0; n < len; ++n) {
      const double r = alpha * s[n] - static_cast<double>(e[n]);
      b += r * r;
    }
    double value;
    bool pass_gradient = true;
    if (b <= 0.0) {
      value = clamp_db;
      pass_gradient = false;
    } else if (a <= 0.0) {
      value = -clamp_db;
      pass_gradient = false;
    } else {
      value = 10.0 * std::log10(a / b);
      if (value > clamp_db) {
        value = clamp_db;
        pass_gradient = false;
      } else if (value < -clamp_db) {
        value = -clamp_db;
      }
    }
    total += value;
    if (pass_gradient) {
      // d SI-SDR / d e = (10 / ln 10) (2 alpha s / A - 2 (e - alpha s) / B)
      double* g = grads->data() + i * len;
      for (std::size_t n = 0; n < len; ++n) {
        const double as = alpha * s[n];
        g[n] = db * (2.0 * as / a - 2.0 * (static_cast<double>(e[n]) - as) / b);
      }
    }
  }
  const double scale = -1.0 / static_cast<double>(k);
  return nn::Tensor<Real>::from_op(
      {1}, {static_cast<Real>(scale * total)}, {estimates},
      [grads, scale](nn::Node<Real>& node) {
        Real* g = nn::parent_grad(node, 0);
        if (!g) return;
        const double up = static_cast<double>(node.grad[0]) * scale;
        for (std::size_t i = 0; i < grads->size(); ++i) g[i] += static_cast<Real>(up * (*grads)[i]);
      });
}

template <typename Real>
std::vector<std::vector<double>> rows(const nn::Tensor<Real>& x) {
  if (x.rank() != 2) throw std::invalid_argument("rows: expected a matrix");
  std::vector<std::vector<double>> out(x.dim(0));
  const auto v = x.data();
  for (std::size_t i = 0; i < x.dim(0); ++i) {
    out[i].assign(v.begin() + static_cast<long>(i * x.dim(1)),
                  v.begin() + static_cast<long>((i + 1) * x.dim(1)));
  }
  return out;
}

template nn::Tensor<float> istft_op<float>(const nn::Tensor<float>&, const dsp::StftConfig&, std::size_t);
template nn::Tensor<double> istft_op<double>(const nn::Tensor<double>&, const dsp::StftConfig&, std::size_t);
template nn::Tensor<float> si_sdr_loss<float>(const nn::Tensor<float>&, const std::vector<std::vector<double>>&,
                                              const std::vector<std::size_t>&, double);
template nn::Tensor<double> si_sdr_loss<double>(const nn::Tensor<double>&, const std::vector<std::vector<double>>&,
                                                const std::vector<std::size_t>&, double);
template std::vector<std::vector<double>> rows<float>(const nn::Tensor<float>&);
template std::vector<std::vector<double>> rows<double>(const nn::Tensor<double>&);

}  // namespace arraysep::train
