// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/sdl/sdl.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace arraysep::sdl {

SdlVariant parse_variant(const std::string& text) {
  if (text == "sdl") return SdlVariant::kShared;
  if (text == "fsdl") return SdlVariant::kFrequency;
  throw std::invalid_argument("unknown dictionary variant '" + text + "' (expected sdl or fsdl)");
}

std::string to_string(SdlVariant v) { return v == SdlVariant::kShared ? "sdl" : "fsdl"; }

InnerProduct parse_inner_product(const std::string& text) {
  if (text == "hermitian") return InnerProduct::kHermitian;
  if (text == "transpose") return InnerProduct::kTranspose;
  throw std::invalid_argument("unknown inner product '" + text +
                              "' (expected hermitian or transpose)");
}

std::string to_string(InnerProduct p) {
  return p == InnerProduct::kHermitian ? "hermitian" : "transpose";
}

template <typename Real>
std::vector<dsp::Complex> SpatialDictionary<Real>::column(std::size_t f, std::size_t n) const {
  const std::size_t fd = variant == SdlVariant::kShared ? 0 : f;
  std::vector<dsp::Complex> col(channels);
  for (std::size_t m = 0; m < channels; ++m) {
    const std::size_t i = (fd * channels + m) * atoms + n;
    col[m] = {static_cast<double>(real.data()[i]), static_cast<double>(imag.data()[i])};
  }
  return col;
}

template <typename Real>
void SpatialDictionary<Real>::collect(nn::ParamSet<Real>& set, const std::string& prefix) const {
  set.add(prefix + ".real", real);
  set.add(prefix + ".imag", imag);
}

template <typename Real>
SpatialDictionary<Real> init_dictionary(std::size_t channels, std::size_t atoms, SdlVariant variant,
                                        std::size_t bins, nn::Rng& rng) {
  if (channels == 0 || atoms == 0) {
    throw std::invalid_argument("dictionary needs at least one channel and one atom");
  }
  SpatialDictionary<Real> d;
  d.variant = variant;
  d.channels = channels;
  d.atoms = atoms;
  d.bins = variant == SdlVariant::kShared ? 1 : bins;
  if (d.bins == 0) throw std::invalid_argument("frequency-dependent dictionary needs bins >= 1");

  const std::size_t count = d.bins * channels * atoms;
  std::vector<double> re(count), im(count);
  for (std::size_t i = 0; i < count; ++i) {
    re[i] = rng.normal();
    im[i] = rng.normal();
  }
  for (std::size_t f = 0; f < d.bins; ++f) {
    for (std::size_t n = 0; n < atoms; ++n) {
      double norm2 = 0.0;
      for (std::size_t m = 0; m < channels; ++m) {
        const std::size_t i = (f * channels + m) * atoms + n;
        norm2 += re[i] * re[i] + im[i] * im[i];
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t m = 0; m < channels; ++m) {
        const std::size_t i = (f * channels + m) * atoms + n;
        re[i] *= inv;
        im[i] *= inv;
      }
    }
  }
  nn::Shape shape = variant == SdlVariant::kShared ? nn::Shape{channels, atoms}
                                                   : nn::Shape{d.bins, channels, atoms};
  d.real = nn::Tensor<Real>::parameter(shape, std::vector<Real>(re.begin(), re.end()));
  d.imag = nn::Tensor<Real>::parameter(shape, std::vector<Real>(im.begin(), im.end()));
  return d;
}

std::vector<double> average_magnitude(const dsp::ComplexSpectrogram& spec) {
  std::vector<double> out(spec.frames * spec.bins, 0.0);
  for (std::size_t tf = 0; tf < out.size(); ++tf) {
    double s = 0.0;
    for (std::size_t m = 0; m < spec.channels; ++m) s += std::abs(spec.data[tf * spec.channels + m]);
    out[tf] = s / static_cast<double>(spec.channels);
  }
  return out;
}

namespace {

// Per-bin data shared between the forward and backward passes.
struct Workspace {
  std::size_t frames, bins, channels, atoms, dict_bins;
  bool hermitian;
  std::vector<double> xr, xi;  // [T*F*M]
  std::vector<double> nx;      // |x|^2 per bin
  std::vector<double> scale;   // x_avg or 1 per bin
  std::vector<double> nd;      // |d|^2 per (dict bin, atom)
};

// Real and imaginary parts of <d(n), x> for one bin.
inline void inner(const Workspace& w, const double* dr, const double* di, std::size_t tf,
                  std::size_t n, double& pr, double& pi) {
  const double* xr = w.xr.data() + tf * w.channels;
  const double* xi = w.xi.data() + tf * w.channels;
  pr = 0.0;
  pi = 0.0;
  for (std::size_t m = 0; m < w.channels; ++m) {
    const double a = dr[m * w.atoms + n], b = di[m * w.atoms + n];
    if (w.hermitian) {
      pr += a * xr[m] + b * xi[m];
      pi += a * xi[m] - b * xr[m];
    } else {
      pr += a * xr[m] - b * xi[m];
      pi += a * xi[m] + b * xr[m];
    }
  }
}

}  // namespace

template <typename Real>
nn::Tensor<Real> spatial_embed(const dsp::ComplexSpectrogram& spec, const SpatialDictionary<Real>& dict,
                               InnerProduct product, bool scale_by_magnitude) {
  if (spec.channels != dict.channels) {
    throw std::invalid_argument("spatial_embed: spectrogram has " + std::to_string(spec.channels) +
                                " channels, dictionary expects " + std::to_string(dict.channels));
  }
  if (dict.variant == SdlVariant::kFrequency && dict.bins != spec.bins) {
    throw std::invalid_argument("spatial_embed: dictionary has " + std::to_string(dict.bins) +
                                " bins, spectrogram has " + std::to_string(spec.bins));
  }

  auto w = std::make_shared<Workspace>();
  w->frames = spec.frames;
  w->bins = spec.bins;
  w->channels = spec.channels;
  w->atoms = dict.atoms;
  w->dict_bins = dict.variant == SdlVariant::kShared ? 1 : dict.bins;
  w->hermitian = product == InnerProduct::kHermitian;
  const std::size_t tf_count = spec.frames * spec.bins;
  const std::size_t M = spec.channels, N = dict.atoms;
  w->xr.resize(tf_count * M);
  w->xi.resize(tf_count * M);
  w->nx.assign(tf_count, 0.0);
  w->scale.assign(tf_count, 1.0);
  for (std::size_t tf = 0; tf < tf_count; ++tf) {
    double mag = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const dsp::Complex z = spec.data[tf * M + m];
      w->xr[tf * M + m] = z.real();
      w->xi[tf * M + m] = z.imag();
      w->nx[tf] += std::norm(z);
      mag += std::abs(z);
    }
    if (scale_by_magnitude) w->scale[tf] = mag / static_cast<double>(M);
  }

  const std::vector<double> dr(dict.real.data().begin(), dict.real.data().end());
  const std::vector<double> di(dict.imag.data().begin(), dict.imag.data().end());
  w->nd.assign(w->dict_bins * N, 0.0);
  for (std::size_t fd = 0; fd < w->dict_bins; ++fd) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t i = (fd * M + m) * N + n;
        w->nd[fd * N + n] += dr[i] * dr[i] + di[i] * di[i];
      }
    }
  }
  for (std::size_t k = 0; k < w->nd.size(); ++k) {
    if (w->nd[k] == 0.0) {
      throw std::invalid_argument("spatial_embed: dictionary column " + std::to_string(k % N) +
                                  " is all zero");
    }
  }

  std::vector<Real> out(tf_count * N, Real(0));
  for (std::size_t tf = 0; tf < tf_count; ++tf) {
    if (w->nx[tf] == 0.0) continue;
    const std::size_t fd = w->dict_bins == 1 ? 0 : tf % spec.bins;
    const double* drf = dr.data() + fd * M * N;
    const double* dif = di.data() + fd * M * N;
    for (std::size_t n = 0; n < N; ++n) {
      double pr, pi;
      inner(*w, drf, dif, tf, n, pr, pi);
      // rounding can push a parallel pair an ulp past 1
      const double ap = std::min((pr * pr + pi * pi) / (w->nd[fd * N + n] * w->nx[tf]), 1.0);
      out[tf * N + n] = static_cast<Real>(w->scale[tf] * ap);
    }
  }

  return nn::Tensor<Real>::from_op(
      {spec.frames, spec.bins, N}, std::move(out), {dict.real, dict.imag},
      [w](nn::Node<Real>& node) {
        Real* gr = nn::parent_grad(node, 0);
        Real* gi = nn::parent_grad(node, 1);
        if (!gr && !gi) return;
        const std::size_t M = w->channels, N = w->atoms;
        const std::vector<double> dr(node.parents[0]->value.begin(), node.parents[0]->value.end());
        const std::vector<double> di(node.parents[1]->value.begin(), node.parents[1]->value.end());
        std::vector<double> acc_r(dr.size(), 0.0), acc_i(di.size(), 0.0);
        const std::size_t tf_count = w->frames * w->bins;
        for (std::size_t tf = 0; tf < tf_count; ++tf) {
          if (w->nx[tf] == 0.0) continue;
          const std::size_t fd = w->dict_bins == 1 ? 0 : tf % w->bins;
          const double* drf = dr.data() + fd * M * N;
          const double* dif = di.data() + fd * M * N;
          const double* xr = w->xr.data() + tf * M;
          const double* xi = w->xi.data() + tf * M;
          for (std::size_t n = 0; n < N; ++n) {
            const double g = static_cast<double>(node.grad[tf * N + n]) * w->scale[tf];
            if (g == 0.0) continue;
            double pr, pi;
            inner(*w, drf, dif, tf, n, pr, pi);
            const double nd = w->nd[fd * N + n];
            const double q = pr * pr + pi * pi;
            const double inv = 1.0 / (nd * w->nx[tf]);
            const double shrink = 2.0 * q * inv / nd;
            for (std::size_t m = 0; m < M; ++m) {
              const std::size_t i = (fd * M + m) * N + n;
              double dq_dr, dq_di;
              if (w->hermitian) {
                dq_dr = 2.0 * (pr * xr[m] + pi * xi[m]);
                dq_di = 2.0 * (pr * xi[m] - pi * xr[m]);
              } else {
                dq_dr = 2.0 * (pr * xr[m] + pi * xi[m]);
                dq_di = 2.0 * (pi * xr[m] - pr * xi[m]);
              }
              acc_r[i] += g * (dq_dr * inv - shrink * drf[m * N + n]);
              acc_i[i] += g * (dq_di * inv - shrink * dif[m * N + n]);
            }
          }
        }
        for (std::size_t i = 0; i < acc_r.size(); ++i) {
          if (gr) gr[i] += static_cast<Real>(acc_r[i]);
          if (gi) gi[i] += static_cast<Real>(acc_i[i]);
        }
      });
}

template struct SpatialDictionary<float>;
template struct SpatialDictionary<double>;
template SpatialDictionary<float> init_dictionary<float>(std::size_t, std::size_t, SdlVariant, std::size_t, nn::Rng&);
template SpatialDictionary<double> init_dictionary<double>(std::size_t, std::size_t, SdlVariant, std::size_t, nn::Rng&);
template nn::Tensor<float> spatial_embed<float>(const dsp::ComplexSpectrogram&, const SpatialDictionary<float>&, InnerProduct, bool);
template nn::Tensor<double> spatial_embed<double>(const dsp::ComplexSpectrogram&, const SpatialDictionary<double>&, InnerProduct, bool);

}  // namespace arraysep::sdl
