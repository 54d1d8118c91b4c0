// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/nn/ops.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace arraysep::nn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename Real>
void require_same_shape(const Tensor<Real>& a, const Tensor<Real>& b,
                        const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      to_string(a.shape()) + " vs " +
                                      to_string(b.shape()));
}

// Single-precision exp that the compiler can vectorize: reduction by ln 2
// and the classic degree-6 minimax polynomial, about 2 ulp on [-87, 88].
inline float exp_lane(float x) {
  x = x < -87.0f ? -87.0f : x;
  x = x > 88.0f ? 88.0f : x;
  constexpr float kMagic = 12582912.0f;  // 1.5 * 2^23, rounds to nearest
  const float n = (x * 1.44269504088896341f + kMagic) - kMagic;
  float r = x - n * 0.693359375f;
  r -= n * -2.12194440e-4f;
  float p = 1.9875691500e-4f;
  p = p * r + 1.3981999507e-3f;
  p = p * r + 8.3334519073e-3f;
  p = p * r + 4.1665795894e-2f;
  p = p * r + 1.6666665459e-1f;
  p = p * r + 5.0000001201e-1f;
  p = p * r * r + r + 1.0f;
  const std::int32_t bits = (static_cast<std::int32_t>(n) + 127) << 23;
  return p * std::bit_cast<float>(bits);
}

template <typename Real>
inline Real exp_real(Real x) {
  if constexpr (std::is_same_v<Real, float>) {
    return exp_lane(x);
  } else {
    return std::exp(x);
  }
}

template <typename Real>
Real sigmoid_scalar(Real x) {
  if constexpr (std::is_same_v<Real, float>) {
    // exp_lane clamps its argument, so this branch-free form cannot overflow.
    return 1.0f / (1.0f + exp_lane(-x));
  } else {
    const Real e = std::exp(-std::abs(x));
    const Real s = Real(1) / (Real(1) + e);
    return x >= Real(0) ? s : e * s;
  }
}

// Elementwise unary op with derivative evaluated from (x, y).
template <typename Real, typename Fwd, typename Deriv>
Tensor<Real> unary(const Tensor<Real>& x, Fwd fwd, Deriv deriv) {
  std::vector<Real> y(x.numel());
  const Real* xs = x.data().data();
  Real* yv = y.data();
  const std::size_t count = y.size();
#pragma omp simd
  for (std::size_t i = 0; i < count; ++i) yv[i] = fwd(xs[i]);
  return Tensor<Real>::from_op(x.shape(), std::move(y), {x}, [deriv](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    const Real* xv = n.parents[0]->value.data();
    const Real* yv = n.value.data();
    const Real* g = n.grad.data();
    const std::size_t count = n.grad.size();
#pragma omp simd
    for (std::size_t i = 0; i < count; ++i) gx[i] += g[i] * deriv(xv[i], yv[i]);
  });
}

thread_local AttentionCounter* g_counter = nullptr;
thread_local std::string g_label;

}  // namespace

// --- elementwise ---------------------------------------------------------------

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a, b, "add");
  std::vector<Real> y(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return Tensor<Real>::from_op(a.shape(), std::move(y), {a, b}, [](Node<Real>& n) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (Real* g = parent_grad(n, p)) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
      }
    }
  });
}

template <typename Real>
Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a, b, "sub");
  std::vector<Real> y(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  return Tensor<Real>::from_op(a.shape(), std::move(y), {a, b}, [](Node<Real>& n) {
    if (Real* g = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    }
    if (Real* g = parent_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

template <typename Real>
Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a, b, "mul");
  std::vector<Real> y(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  return Tensor<Real>::from_op(a.shape(), std::move(y), {a, b}, [](Node<Real>& n) {
    const auto& av = n.parents[0]->value;
    const auto& bv = n.parents[1]->value;
    if (Real* g = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * bv[i];
    }
    if (Real* g = parent_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * av[i];
    }
  });
}

template <typename Real>
Tensor<Real> affine(const Tensor<Real>& a, double scale, double shift) {
  const Real s = static_cast<Real>(scale), c = static_cast<Real>(shift);
  std::vector<Real> y(a.numel());
  const auto av = a.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * av[i] + c;
  return Tensor<Real>::from_op(a.shape(), std::move(y), {a}, [s](Node<Real>& n) {
    if (Real* g = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += s * n.grad[i];
    }
  });
}

template <typename Real>
Tensor<Real> add_last(const Tensor<Real>& a, const Tensor<Real>& b) {
  const std::size_t d = a.shape().back();
  require(b.numel() == d, "add_last: broadcast operand has " +
                              std::to_string(b.numel()) + " values, expected " +
                              std::to_string(d));
  const std::size_t rows = a.numel() / d;
  std::vector<Real> y(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] = av[r * d + j] + bv[j];
  }
  return Tensor<Real>::from_op(a.shape(), std::move(y), {a, b}, [rows, d](Node<Real>& n) {
    if (Real* g = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    }
    if (Real* g = parent_grad(n, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) g[j] += n.grad[r * d + j];
      }
    }
  });
}

template <typename Real>
Tensor<Real> blend(const Tensor<Real>& gate, const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(gate, a, "blend");
  require_same_shape(a, b, "blend");
  std::vector<Real> y(a.numel());
  const auto mv = gate.data(), av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = mv[i] * av[i] + (Real(1) - mv[i]) * bv[i];
  }
  return Tensor<Real>::from_op(a.shape(), std::move(y), {gate, a, b}, [](Node<Real>& n) {
    const auto& mv = n.parents[0]->value;
    const auto& av = n.parents[1]->value;
    const auto& bv = n.parents[2]->value;
    if (Real* g = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * (av[i] - bv[i]);
    }
    if (Real* g = parent_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * mv[i];
    }
    if (Real* g = parent_grad(n, 2)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * (Real(1) - mv[i]);
    }
  });
}

template <typename Real>
Tensor<Real> relu(const Tensor<Real>& x) {
  return unary<Real>(
      x, [](Real v) { return v > Real(0) ? v : Real(0); },
      [](Real v, Real) { return v > Real(0) ? Real(1) : Real(0); });
}

template <typename Real>
Tensor<Real> sigmoid(const Tensor<Real>& x) {
  return unary<Real>(
      x, [](Real v) { return sigmoid_scalar(v); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

template <typename Real>
Tensor<Real> swish(const Tensor<Real>& x) {
  return unary<Real>(
      x, [](Real v) { return v * sigmoid_scalar(v); },
      [](Real v, Real) {
        const Real s = sigmoid_scalar(v);
        return s + v * s * (Real(1) - s);
      });
}

template <typename Real>
Tensor<Real> glu(const Tensor<Real>& x) {
  const std::size_t d2 = x.shape().back();
  require(d2 % 2 == 0, "glu: last axis must be even, got " + std::to_string(d2));
  const std::size_t d = d2 / 2;
  const std::size_t rows = x.numel() / d2;
  Shape shape = x.shape();
  shape.back() = d;
  std::vector<Real> y(rows * d);
  const auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      y[r * d + j] = xv[r * d2 + j] * sigmoid_scalar(xv[r * d2 + d + j]);
    }
  }
  return Tensor<Real>::from_op(std::move(shape), std::move(y), {x}, [rows, d](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    const auto& xv = n.parents[0]->value;
    const std::size_t d2 = 2 * d;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        const Real a = xv[r * d2 + j];
        const Real s = sigmoid_scalar(xv[r * d2 + d + j]);
        const Real g = n.grad[r * d + j];
        gx[r * d2 + j] += g * s;
        gx[r * d2 + d + j] += g * a * s * (Real(1) - s);
      }
    }
  });
}

// --- dense -------------------------------------------------------------------

template <typename Real>
Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias) {
  require(weight.rank() == 2, "linear: weight must be [in, out]");
  const std::size_t in = weight.dim(0), out = weight.dim(1);
  require(x.shape().back() == in, "linear: input feature size " +
                                      std::to_string(x.shape().back()) +
                                      " does not match weight " +
                                      to_string(weight.shape()));
  require(!bias.defined() || bias.numel() == out, "linear: bias size mismatch");
  const std::size_t rows = x.numel() / in;
  Shape shape = x.shape();
  shape.back() = out;
  std::vector<Real> y(rows * out);
  const Real* xv = x.data().data();
  const Real* wv = weight.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    Real* yr = y.data() + r * out;
    if (bias.defined()) {
      std::copy(bias.data().begin(), bias.data().end(), yr);
    }
    for (std::size_t i = 0; i < in; ++i) {
      const Real xi = xv[r * in + i];
      const Real* wr = wv + i * out;
#pragma omp simd
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
  }
  return Tensor<Real>::from_op(std::move(shape), std::move(y), {x, weight, bias},
                               [rows, in, out](Node<Real>& n) {
    const Real* xv = n.parents[0]->value.data();
    const Real* wv = n.parents[1]->value.data();
    const Real* gy = n.grad.data();
    if (Real* gx = parent_grad(n, 0)) {
      std::vector<Real> wt(in * out);
      for (std::size_t i = 0; i < in; ++i) {
        for (std::size_t o = 0; o < out; ++o) wt[o * in + i] = wv[i * out + o];
      }
      for (std::size_t r = 0; r < rows; ++r) {
        const Real* gr = gy + r * out;
        Real* gxr = gx + r * in;
        for (std::size_t o = 0; o < out; ++o) {
          const Real g = gr[o];
          const Real* wr = wt.data() + o * in;
#pragma omp simd
          for (std::size_t i = 0; i < in; ++i) gxr[i] += g * wr[i];
        }
      }
    }
    if (Real* gw = parent_grad(n, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        const Real* gr = gy + r * out;
        for (std::size_t i = 0; i < in; ++i) {
          const Real xi = xv[r * in + i];
          Real* gwr = gw + i * out;
#pragma omp simd
          for (std::size_t o = 0; o < out; ++o) gwr[o] += xi * gr[o];
        }
      }
    }
    if (Real* gb = parent_grad(n, 2)) {
      for (std::size_t r = 0; r < rows; ++r) {
        const Real* gr = gy + r * out;
#pragma omp simd
        for (std::size_t o = 0; o < out; ++o) gb[o] += gr[o];
      }
    }
  });
}

template <typename Real>
Tensor<Real> layer_norm(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta, double eps) {
  const std::size_t d = x.shape().back();
  require(gamma.numel() == d && beta.numel() == d,
          "layer_norm: gamma/beta must have " + std::to_string(d) + " values");
  const std::size_t rows = x.numel() / d;
  std::vector<Real> y(x.numel()), xhat(x.numel()), inv_std(rows);
  const auto xv = x.data(), gv = gamma.data(), bv = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* xr = xv.data() + r * d;
    Real mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<Real>(d);
    Real var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<Real>(d);
    const Real inv = Real(1) / std::sqrt(var + static_cast<Real>(eps));
    inv_std[r] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      const Real h = (xr[j] - mu) * inv;
      xhat[r * d + j] = h;
      y[r * d + j] = gv[j] * h + bv[j];
    }
  }
  return Tensor<Real>::from_op(
      x.shape(), std::move(y), {x, gamma, beta},
      [rows, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<Real>& n) {
        const auto& gv = n.parents[1]->value;
        Real* gx = parent_grad(n, 0);
        Real* gg = parent_grad(n, 1);
        Real* gb = parent_grad(n, 2);
        std::vector<Real> dxhat(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const Real* gy = n.grad.data() + r * d;
          const Real* h = xhat.data() + r * d;
          if (gg || gb) {
            for (std::size_t j = 0; j < d; ++j) {
              if (gg) gg[j] += gy[j] * h[j];
              if (gb) gb[j] += gy[j];
            }
          }
          if (!gx) continue;
          Real mean_d = 0, mean_dh = 0;
          for (std::size_t j = 0; j < d; ++j) {
            dxhat[j] = gy[j] * gv[j];
            mean_d += dxhat[j];
            mean_dh += dxhat[j] * h[j];
          }
          mean_d /= static_cast<Real>(d);
          mean_dh /= static_cast<Real>(d);
          for (std::size_t j = 0; j < d; ++j) {
            gx[r * d + j] += inv_std[r] * (dxhat[j] - mean_d - h[j] * mean_dh);
          }
        }
      });
}

// --- convolution -----------------------------------------------------------

template <typename Real>
Tensor<Real> conv2d(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias, std::size_t stride, std::size_t pad) {
  require(x.rank() == 3 && weight.rank() == 4, "conv2d: expects x [H,W,C] and weight [KH,KW,Cin,Cout]");
  const std::size_t h = x.dim(0), w = x.dim(1), ci = x.dim(2);
  const std::size_t kh = weight.dim(0), kw = weight.dim(1), co = weight.dim(3);
  require(weight.dim(2) == ci, "conv2d: input channels " + std::to_string(ci) +
                                   " do not match weight " + to_string(weight.shape()));
  require(stride >= 1, "conv2d: stride must be >= 1");
  require(h + 2 * pad >= kh && w + 2 * pad >= kw, "conv2d: kernel larger than padded input");
  require(!bias.defined() || bias.numel() == co, "conv2d: bias size mismatch");
  const std::size_t ho = (h + 2 * pad - kh) / stride + 1;
  const std::size_t wo = (w + 2 * pad - kw) / stride + 1;

  std::vector<Real> y(ho * wo * co);
  const Real* xv = x.data().data();
  const Real* wv = weight.data().data();
  for (std::size_t oy = 0; oy < ho; ++oy) {
    for (std::size_t ox = 0; ox < wo; ++ox) {
      Real* yr = y.data() + (oy * wo + ox) * co;
      if (bias.defined()) std::copy(bias.data().begin(), bias.data().end(), yr);
      for (std::size_t ky = 0; ky < kh; ++ky) {
        const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
        if (iy < 0 || iy >= static_cast<long>(h)) continue;
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
          if (ix < 0 || ix >= static_cast<long>(w)) continue;
          const Real* xr = xv + (static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * ci;
          const Real* wk = wv + (ky * kw + kx) * ci * co;
          for (std::size_t c = 0; c < ci; ++c) {
            const Real xc = xr[c];
            const Real* wr = wk + c * co;
#pragma omp simd
            for (std::size_t o = 0; o < co; ++o) yr[o] += xc * wr[o];
          }
        }
      }
    }
  }
  return Tensor<Real>::from_op(
      {ho, wo, co}, std::move(y), {x, weight, bias},
      [=](Node<Real>& n) {
        const Real* xv = n.parents[0]->value.data();
        const Real* wv = n.parents[1]->value.data();
        Real* gx = parent_grad(n, 0);
        Real* gw = parent_grad(n, 1);
        Real* gb = parent_grad(n, 2);
        for (std::size_t oy = 0; oy < ho; ++oy) {
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const Real* gy = n.grad.data() + (oy * wo + ox) * co;
            if (gb) {
              for (std::size_t o = 0; o < co; ++o) gb[o] += gy[o];
            }
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              if (iy < 0 || iy >= static_cast<long>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                const std::size_t xoff = (static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * ci;
                const std::size_t woff = (ky * kw + kx) * ci * co;
                for (std::size_t c = 0; c < ci; ++c) {
                  const Real* wr = wv + woff + c * co;
                  if (gx) {
                    Real acc = 0;
#pragma omp simd reduction(+ : acc)
                    for (std::size_t o = 0; o < co; ++o) acc += gy[o] * wr[o];
                    gx[xoff + c] += acc;
                  }
                  if (gw) {
                    const Real xc = xv[xoff + c];
                    Real* gwr = gw + woff + c * co;
#pragma omp simd
                    for (std::size_t o = 0; o < co; ++o) gwr[o] += xc * gy[o];
                  }
                }
              }
            }
          }
        }
      });
}

template <typename Real>
Tensor<Real> conv_transpose2d(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias, std::size_t stride) {
  require(x.rank() == 3 && weight.rank() == 4, "conv_transpose2d: expects x [H,W,C] and weight [KH,KW,Cin,Cout]");
  const std::size_t h = x.dim(0), w = x.dim(1), ci = x.dim(2);
  const std::size_t kh = weight.dim(0), kw = weight.dim(1), co = weight.dim(3);
  require(weight.dim(2) == ci, "conv_transpose2d: input channels " + std::to_string(ci) +
                                   " do not match weight " + to_string(weight.shape()));
  require(stride >= 1, "conv_transpose2d: stride must be >= 1");
  require(!bias.defined() || bias.numel() == co, "conv_transpose2d: bias size mismatch");
  const std::size_t ho = (h - 1) * stride + kh;
  const std::size_t wo = (w - 1) * stride + kw;

  std::vector<Real> y(ho * wo * co, Real(0));
  if (bias.defined()) {
    for (std::size_t p = 0; p < ho * wo; ++p) {
      std::copy(bias.data().begin(), bias.data().end(), y.begin() + static_cast<long>(p * co));
    }
  }
  const Real* xv = x.data().data();
  const Real* wv = weight.data().data();
  for (std::size_t iy = 0; iy < h; ++iy) {
    for (std::size_t ix = 0; ix < w; ++ix) {
      const Real* xr = xv + (iy * w + ix) * ci;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx) {
          Real* yr = y.data() + ((iy * stride + ky) * wo + ix * stride + kx) * co;
          const Real* wk = wv + (ky * kw + kx) * ci * co;
          for (std::size_t c = 0; c < ci; ++c) {
            const Real xc = xr[c];
            const Real* wr = wk + c * co;
#pragma omp simd
            for (std::size_t o = 0; o < co; ++o) yr[o] += xc * wr[o];
          }
        }
      }
    }
  }
  return Tensor<Real>::from_op(
      {ho, wo, co}, std::move(y), {x, weight, bias},
      [=](Node<Real>& n) {
        const Real* xv = n.parents[0]->value.data();
        const Real* wv = n.parents[1]->value.data();
        Real* gx = parent_grad(n, 0);
        Real* gw = parent_grad(n, 1);
        Real* gb = parent_grad(n, 2);
        if (gb) {
          for (std::size_t p = 0; p < ho * wo; ++p) {
            for (std::size_t o = 0; o < co; ++o) gb[o] += n.grad[p * co + o];
          }
        }
        for (std::size_t iy = 0; iy < h; ++iy) {
          for (std::size_t ix = 0; ix < w; ++ix) {
            const std::size_t xoff = (iy * w + ix) * ci;
            for (std::size_t ky = 0; ky < kh; ++ky) {
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const Real* gy = n.grad.data() + ((iy * stride + ky) * wo + ix * stride + kx) * co;
                const std::size_t woff = (ky * kw + kx) * ci * co;
                for (std::size_t c = 0; c < ci; ++c) {
                  if (gx) {
                    const Real* wr = wv + woff + c * co;
                    Real acc = 0;
#pragma omp simd reduction(+ : acc)
                    for (std::size_t o = 0; o < co; ++o) acc += gy[o] * wr[o];
                    gx[xoff + c] += acc;
                  }
                  if (gw) {
                    const Real xc = xv[xoff + c];
                    Real* gwr = gw + woff + c * co;
#pragma omp simd
                    for (std::size_t o = 0; o < co; ++o) gwr[o] += xc * gy[o];
                  }
                }
              }
            }
          }
        }
      });
}

template <typename Real>
Tensor<Real> depthwise_conv1d(const Tensor<Real>& x, const Tensor<Real>& weight, const Tensor<Real>& bias) {
  require(x.rank() == 3 && weight.rank() == 2, "depthwise_conv1d: expects x [B,L,D] and weight [K,D]");
  const std::size_t b = x.dim(0), len = x.dim(1), d = x.dim(2);
  const std::size_t k = weight.dim(0);
  require(weight.dim(1) == d, "depthwise_conv1d: channel mismatch");
  require(k % 2 == 1, "depthwise_conv1d: kernel size must be odd");
  require(!bias.defined() || bias.numel() == d, "depthwise_conv1d: bias size mismatch");
  const long half = static_cast<long>(k / 2);

  std::vector<Real> y(x.numel());
  const Real* xv = x.data().data();
  const Real* wv = weight.data().data();
  for (std::size_t s = 0; s < b; ++s) {
    for (std::size_t l = 0; l < len; ++l) {
      Real* yr = y.data() + (s * len + l) * d;
      if (bias.defined()) std::copy(bias.data().begin(), bias.data().end(), yr);
      for (std::size_t i = 0; i < k; ++i) {
        const long src = static_cast<long>(l) + static_cast<long>(i) - half;
        if (src < 0 || src >= static_cast<long>(len)) continue;
        const Real* xr = xv + (s * len + static_cast<std::size_t>(src)) * d;
        const Real* wr = wv + i * d;
#pragma omp simd
        for (std::size_t j = 0; j < d; ++j) yr[j] += xr[j] * wr[j];
      }
    }
  }
  return Tensor<Real>::from_op(
      x.shape(), std::move(y), {x, weight, bias},
      [=](Node<Real>& n) {
        const Real* xv = n.parents[0]->value.data();
        const Real* wv = n.parents[1]->value.data();
        Real* gx = parent_grad(n, 0);
        Real* gw = parent_grad(n, 1);
        Real* gb = parent_grad(n, 2);
        for (std::size_t s = 0; s < b; ++s) {
          for (std::size_t l = 0; l < len; ++l) {
            const Real* gy = n.grad.data() + (s * len + l) * d;
            if (gb) {
              for (std::size_t j = 0; j < d; ++j) gb[j] += gy[j];
            }
            for (std::size_t i = 0; i < k; ++i) {
              const long src = static_cast<long>(l) + static_cast<long>(i) - half;
              if (src < 0 || src >= static_cast<long>(len)) continue;
              const std::size_t xoff = (s * len + static_cast<std::size_t>(src)) * d;
              if (gx) {
                const Real* wr = wv + i * d;
#pragma omp simd
                for (std::size_t j = 0; j < d; ++j) gx[xoff + j] += gy[j] * wr[j];
              }
              if (gw) {
                Real* gwr = gw + i * d;
#pragma omp simd
                for (std::size_t j = 0; j < d; ++j) gwr[j] += gy[j] * xv[xoff + j];
              }
            }
          }
        }
      });
}

// --- attention ---------------------------------------------------------------

AttentionCounter::AttentionCounter() : previous_(g_counter) { g_counter = this; }
AttentionCounter::~AttentionCounter() { g_counter = previous_; }
AttentionCounter* AttentionCounter::current() { return g_counter; }

AttentionLabel::AttentionLabel(std::string label) : previous_(g_label) {
  g_label = std::move(label);
}
AttentionLabel::~AttentionLabel() { g_label = previous_; }
const std::string& AttentionLabel::current() { return g_label; }

namespace {

// Attention kernels are lane-parallel: a block of kLanes queries (or keys) is
// processed together with GCC vector types, so the inner loops carry no
// horizontal reductions. The head width is a template argument so the
// per-lane accumulators stay in registers.
constexpr std::size_t kLanes = 16;

template <typename Real>
struct Lanes;
template <>
struct Lanes<float> {
  typedef float V __attribute__((vector_size(64)));
};
template <>
struct Lanes<double> {
  typedef double V __attribute__((vector_size(128)));
};

template <typename Real>
using Vec = typename Lanes<Real>::V;

template <typename Real>
inline Vec<Real> load(const Real* p) {
  Vec<Real> v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

template <typename Real>
inline void store(Real* p, const Vec<Real>& v) {
  std::memcpy(p, &v, sizeof(v));
}

template <typename Real>
inline Vec<Real> splat(Real x) {
  return Vec<Real>{} + x;
}

// Vector counterpart of exp_lane; the double variant stays exact.
inline Vec<float> vexp(Vec<float> x) {
  typedef std::int32_t I __attribute__((vector_size(64)));
  const Vec<float> lo = splat(-87.0f), hi = splat(88.0f);
  x = x < lo ? lo : x;
  x = x > hi ? hi : x;
  const Vec<float> magic = splat(12582912.0f);  // 1.5 * 2^23, rounds to nearest
  const Vec<float> n = (x * 1.44269504088896341f + magic) - magic;
  Vec<float> r = x - n * 0.693359375f;
  r -= n * -2.12194440e-4f;
  Vec<float> p = splat(1.9875691500e-4f);
  p = p * r + 1.3981999507e-3f;
  p = p * r + 8.3334519073e-3f;
  p = p * r + 4.1665795894e-2f;
  p = p * r + 1.6666665459e-1f;
  p = p * r + 5.0000001201e-1f;
  p = p * r * r + r + 1.0f;
  const I bits = (__builtin_convertvector(n, I) + 127) << 23;
  return p * (Vec<float>)bits;
}

inline Vec<double> vexp(const Vec<double>& x) {
  Vec<double> y;
  for (std::size_t i = 0; i < kLanes; ++i) y[i] = std::exp(x[i]);
  return y;
}

std::size_t padded(std::size_t len) { return (len + kLanes - 1) / kLanes * kLanes; }

// Copies head `hh` of sequence `s` into [hd][stride] (zero padded), times `mul`.
template <typename Real>
void gather_head(const Real* src, std::size_t s, std::size_t hh, std::size_t len, std::size_t d,
                 std::size_t hd, std::size_t stride, Real mul, Real* dst) {
  std::fill(dst, dst + hd * stride, Real(0));
  for (std::size_t l = 0; l < len; ++l) {
    const Real* from = src + (s * len + l) * d + hh * hd;
    for (std::size_t j = 0; j < hd; ++j) dst[j * stride + l] = from[j] * mul;
  }
}

// Forward for one head. qt (already scaled), kt, vt: [HD][stride]. Writes yt
// [HD][stride] and the per-query log-sum-exp.
template <typename Real, std::size_t HD>
void head_forward(const Real* qt, const Real* kt, const Real* vt, std::size_t len, std::size_t stride,
                  Real* yt, Real* lse) {
  using V = Vec<Real>;
  for (std::size_t qb = 0; qb < stride; qb += kLanes) {
    V q[HD], acc[HD];
    for (std::size_t j = 0; j < HD; ++j) {
      q[j] = load(qt + j * stride + qb);
      acc[j] = V{};
    }
    V mx = splat(std::numeric_limits<Real>::lowest());
    for (std::size_t m = 0; m < len; ++m) {
      V sc = q[0] * kt[m];
      for (std::size_t j = 1; j < HD; ++j) sc += q[j] * kt[j * stride + m];
      mx = sc > mx ? sc : mx;
    }
    V total{};
    for (std::size_t m = 0; m < len; ++m) {
      V sc = q[0] * kt[m];
      for (std::size_t j = 1; j < HD; ++j) sc += q[j] * kt[j * stride + m];
      const V p = vexp(sc - mx);
      total += p;
      for (std::size_t j = 0; j < HD; ++j) acc[j] += p * vt[j * stride + m];
    }
    const V inv = splat(Real(1)) / total;
    for (std::size_t j = 0; j < HD; ++j) store(yt + j * stride + qb, acc[j] * inv);
    for (std::size_t i = 0; i < kLanes; ++i) lse[qb + i] = mx[i] + std::log(total[i]);
  }
}

// Backward for one head. qt holds the scaled queries, gt the output gradient
// and r[l] = sum_j g[l][j] y[l][j]. Accumulates the score-space gradients
// into gqt, gkt and gvt, all [HD][stride].
template <typename Real, std::size_t HD>
void head_backward(const Real* qt, const Real* kt, const Real* vt, const Real* gt, const Real* lse,
                   const Real* r, std::size_t len, std::size_t stride, Real* gqt, Real* gkt,
                   Real* gvt) {
  using V = Vec<Real>;
  // Query lanes.
  for (std::size_t qb = 0; qb < stride; qb += kLanes) {
    V q[HD], g[HD], acc[HD];
    for (std::size_t j = 0; j < HD; ++j) {
      q[j] = load(qt + j * stride + qb);
      g[j] = load(gt + j * stride + qb);
      acc[j] = V{};
    }
    const V shift = load(lse + qb), rr = load(r + qb);
    for (std::size_t m = 0; m < len; ++m) {
      V sc = q[0] * kt[m];
      V dp = g[0] * vt[m];
      for (std::size_t j = 1; j < HD; ++j) {
        sc += q[j] * kt[j * stride + m];
        dp += g[j] * vt[j * stride + m];
      }
      const V ds = vexp(sc - shift) * (dp - rr);
      for (std::size_t j = 0; j < HD; ++j) acc[j] += ds * kt[j * stride + m];
    }
    for (std::size_t j = 0; j < HD; ++j) store(gqt + j * stride + qb, load(gqt + j * stride + qb) + acc[j]);
  }
  // Key lanes.
  for (std::size_t mb = 0; mb < stride; mb += kLanes) {
    V k[HD], v[HD], ak[HD], av[HD];
    for (std::size_t j = 0; j < HD; ++j) {
      k[j] = load(kt + j * stride + mb);
      v[j] = load(vt + j * stride + mb);
      ak[j] = V{};
      av[j] = V{};
    }
    for (std::size_t l = 0; l < len; ++l) {
      V sc = k[0] * qt[l];
      V dp = v[0] * gt[l];
      for (std::size_t j = 1; j < HD; ++j) {
        sc += k[j] * qt[j * stride + l];
        dp += v[j] * gt[j * stride + l];
      }
      const V p = vexp(sc - lse[l]);
      const V ds = p * (dp - r[l]);
      for (std::size_t j = 0; j < HD; ++j) {
        ak[j] += ds * qt[j * stride + l];
        av[j] += p * gt[j * stride + l];
      }
    }
    for (std::size_t j = 0; j < HD; ++j) {
      store(gkt + j * stride + mb, load(gkt + j * stride + mb) + ak[j]);
      store(gvt + j * stride + mb, load(gvt + j * stride + mb) + av[j]);
    }
  }
}

template <typename Real>
using ForwardKernel = void (*)(const Real*, const Real*, const Real*, std::size_t, std::size_t, Real*, Real*);
template <typename Real>
using BackwardKernel = void (*)(const Real*, const Real*, const Real*, const Real*, const Real*,
                                const Real*, std::size_t, std::size_t, Real*, Real*, Real*);

template <typename Real, std::size_t HD>
std::pair<ForwardKernel<Real>, BackwardKernel<Real>> kernels_for() {
  return {&head_forward<Real, HD>, &head_backward<Real, HD>};
}

template <typename Real>
std::pair<ForwardKernel<Real>, BackwardKernel<Real>> select_kernels(std::size_t hd) {
  switch (hd) {
    case 1: return kernels_for<Real, 1>();
    case 2: return kernels_for<Real, 2>();
    case 3: return kernels_for<Real, 3>();
    case 4: return kernels_for<Real, 4>();
    case 5: return kernels_for<Real, 5>();
    case 6: return kernels_for<Real, 6>();
    case 7: return kernels_for<Real, 7>();
    case 8: return kernels_for<Real, 8>();
    case 12: return kernels_for<Real, 12>();
    case 16: return kernels_for<Real, 16>();
    case 24: return kernels_for<Real, 24>();
    case 32: return kernels_for<Real, 32>();
    case 48: return kernels_for<Real, 48>();
    case 64: return kernels_for<Real, 64>();
    default:
      throw std::invalid_argument("attention: unsupported head width " + std::to_string(hd) +
                                  " (supported: 1-8, 12, 16, 24, 32, 48, 64)");
  }
}

}  // namespace

// The probability matrix is not kept: backward recomputes probabilities from
// the stored log-sum-exp, so memory stays linear in the sequence length.
template <typename Real>
Tensor<Real> attention(const Tensor<Real>& q, const Tensor<Real>& k, const Tensor<Real>& v, std::size_t heads) {
  require(q.rank() == 3, "attention: expects [B, L, D]");
  require_same_shape(q, k, "attention");
  require_same_shape(q, v, "attention");
  const std::size_t b = q.dim(0), len = q.dim(1), d = q.dim(2);
  require(heads >= 1 && d % heads == 0,
          "attention: model dim " + std::to_string(d) + " not divisible by " +
              std::to_string(heads) + " heads");
  const std::size_t hd = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(hd));
  const auto [fwd, bwd] = select_kernels<Real>(hd);

  if (AttentionCounter* counter = AttentionCounter::current()) {
    counter->add({AttentionLabel::current(), b, heads, len});
  }

  const std::size_t stride = padded(len);
  std::vector<Real> y(q.numel(), Real(0));
  std::vector<Real> lse(b * heads * stride);
  std::vector<Real> qt(hd * stride), kt(hd * stride), vt(hd * stride), yt(hd * stride);

  for (std::size_t s = 0; s < b; ++s) {
    for (std::size_t hh = 0; hh < heads; ++hh) {
      gather_head(q.data().data(), s, hh, len, d, hd, stride, scale, qt.data());
      gather_head(k.data().data(), s, hh, len, d, hd, stride, Real(1), kt.data());
      gather_head(v.data().data(), s, hh, len, d, hd, stride, Real(1), vt.data());
      fwd(qt.data(), kt.data(), vt.data(), len, stride, yt.data(), lse.data() + (s * heads + hh) * stride);
      for (std::size_t l = 0; l < len; ++l) {
        Real* yl = y.data() + (s * len + l) * d + hh * hd;
        for (std::size_t j = 0; j < hd; ++j) yl[j] = yt[j * stride + l];
      }
    }
  }

  return Tensor<Real>::from_op(
      q.shape(), std::move(y), {q, k, v},
      [b, len, d, heads, hd, scale, stride, bwd, lse = std::move(lse)](Node<Real>& n) {
        Real* gq = parent_grad(n, 0);
        Real* gk = parent_grad(n, 1);
        Real* gv = parent_grad(n, 2);
        if (!gq && !gk && !gv) return;
        std::vector<Real> qt(hd * stride), kt(hd * stride), vt(hd * stride), gt(hd * stride);
        std::vector<Real> gqt(hd * stride), gkt(hd * stride), gvt(hd * stride), r(stride);
        const Real* yv = n.value.data();
        for (std::size_t s = 0; s < b; ++s) {
          for (std::size_t hh = 0; hh < heads; ++hh) {
            gather_head(n.parents[0]->value.data(), s, hh, len, d, hd, stride, scale, qt.data());
            gather_head(n.parents[1]->value.data(), s, hh, len, d, hd, stride, Real(1), kt.data());
            gather_head(n.parents[2]->value.data(), s, hh, len, d, hd, stride, Real(1), vt.data());
            gather_head(n.grad.data(), s, hh, len, d, hd, stride, Real(1), gt.data());
            std::fill(r.begin(), r.end(), Real(0));
            for (std::size_t l = 0; l < len; ++l) {
              const std::size_t off = (s * len + l) * d + hh * hd;
              Real acc = 0;
              for (std::size_t j = 0; j < hd; ++j) acc += n.grad[off + j] * yv[off + j];
              r[l] = acc;
            }
            std::fill(gqt.begin(), gqt.end(), Real(0));
            std::fill(gkt.begin(), gkt.end(), Real(0));
            std::fill(gvt.begin(), gvt.end(), Real(0));
            bwd(qt.data(), kt.data(), vt.data(), gt.data(), lse.data() + (s * heads + hh) * stride,
                r.data(), len, stride, gqt.data(), gkt.data(), gvt.data());
            for (std::size_t l = 0; l < len; ++l) {
              const std::size_t off = (s * len + l) * d + hh * hd;
              for (std::size_t j = 0; j < hd; ++j) {
                if (gq) gq[off + j] += gqt[j * stride + l] * scale;
                if (gk) gk[off + j] += gkt[j * stride + l];
                if (gv) gv[off + j] += gvt[j * stride + l];
              }
            }
          }
        }
      });
}

// --- layout ----------------------------------------------------------------

template <typename Real>
Tensor<Real> swap_leading(const Tensor<Real>& x) {
  require(x.rank() >= 2, "swap_leading: rank must be >= 2");
  const std::size_t a = x.dim(0), b = x.dim(1);
  const std::size_t inner = x.numel() / (a * b);
  Shape shape = x.shape();
  std::swap(shape[0], shape[1]);
  std::vector<Real> y(x.numel());
  const Real* xv = x.data().data();
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      std::copy(xv + (i * b + j) * inner, xv + (i * b + j + 1) * inner,
                y.data() + (j * a + i) * inner);
    }
  }
  return Tensor<Real>::from_op(std::move(shape), std::move(y), {x}, [a, b, inner](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        const Real* src = n.grad.data() + (j * a + i) * inner;
        Real* dst = gx + (i * b + j) * inner;
        for (std::size_t e = 0; e < inner; ++e) dst[e] += src[e];
      }
    }
  });
}

template <typename Real>
Tensor<Real> pad_end2d(const Tensor<Real>& x, std::size_t rows, std::size_t cols) {
  require(x.rank() == 3, "pad_end2d: expects [H, W, C]");
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  require(rows >= h && cols >= w, "pad_end2d: target smaller than input");
  std::vector<Real> y(rows * cols * c, Real(0));
  const Real* xv = x.data().data();
  for (std::size_t i = 0; i < h; ++i) {
    std::copy(xv + i * w * c, xv + (i + 1) * w * c, y.data() + i * cols * c);
  }
  return Tensor<Real>::from_op({rows, cols, c}, std::move(y), {x}, [h, w, c, cols](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t e = 0; e < w * c; ++e) gx[i * w * c + e] += n.grad[i * cols * c + e];
    }
  });
}

template <typename Real>
Tensor<Real> crop2d(const Tensor<Real>& x, std::size_t rows, std::size_t cols) {
  require(x.rank() == 3, "crop2d: expects [H, W, C]");
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  require(rows <= h && cols <= w, "crop2d: target larger than input");
  std::vector<Real> y(rows * cols * c);
  const Real* xv = x.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy(xv + i * w * c, xv + i * w * c + cols * c, y.data() + i * cols * c);
  }
  return Tensor<Real>::from_op({rows, cols, c}, std::move(y), {x}, [rows, cols, w, c](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t e = 0; e < cols * c; ++e) gx[i * w * c + e] += n.grad[i * cols * c + e];
    }
  });
}

template <typename Real>
Tensor<Real> reshape(const Tensor<Real>& x, Shape shape) {
  require(numel(shape) == x.numel(), "reshape: " + to_string(x.shape()) +
                                         " cannot become " + to_string(shape));
  std::vector<Real> y(x.data().begin(), x.data().end());
  return Tensor<Real>::from_op(std::move(shape), std::move(y), {x}, [](Node<Real>& n) {
    if (Real* gx = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) gx[i] += n.grad[i];
    }
  });
}

template <typename Real>
Tensor<Real> concat_last(const std::vector<Tensor<Real>>& parts) {
  require(!parts.empty(), "concat_last: no inputs");
  const Shape& lead = parts.front().shape();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require(p.rank() == lead.size() &&
                std::equal(lead.begin(), lead.end() - 1, p.shape().begin()),
            "concat_last: leading axes differ");
    widths.push_back(p.shape().back());
    total += p.shape().back();
  }
  const std::size_t rows = parts.front().numel() / widths.front();
  Shape shape = lead;
  shape.back() = total;
  std::vector<Real> y(rows * total);
  std::size_t col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Real* pv = parts[k].data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(pv + r * widths[k], pv + (r + 1) * widths[k], y.data() + r * total + col);
    }
    col += widths[k];
  }
  return Tensor<Real>::from_op(std::move(shape), std::move(y), parts, [rows, total, widths](Node<Real>& n) {
    std::size_t col = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (Real* g = parent_grad(n, k)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[k]; ++j) {
            g[r * widths[k] + j] += n.grad[r * total + col + j];
          }
        }
      }
      col += widths[k];
    }
  });
}

template <typename Real>
Tensor<Real> slice_last(const Tensor<Real>& x, std::size_t begin, std::size_t end) {
  const std::size_t d = x.shape().back();
  require(begin < end && end <= d, "slice_last: bad range");
  const std::size_t w = end - begin;
  const std::size_t rows = x.numel() / d;
  Shape shape = x.shape();
  shape.back() = w;
  std::vector<Real> y(rows * w);
  const Real* xv = x.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(xv + r * d + begin, xv + r * d + end, y.data() + r * w);
  }
  return Tensor<Real>::from_op(std::move(shape), std::move(y), {x}, [rows, d, w, begin](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < w; ++j) gx[r * d + begin + j] += n.grad[r * w + j];
    }
  });
}

// --- reductions --------------------------------------------------------------

template <typename Real>
Tensor<Real> global_avg_pool(const Tensor<Real>& x) {
  require(x.rank() == 3, "global_avg_pool: expects [H, W, E]");
  const std::size_t e = x.dim(2);
  const std::size_t positions = x.dim(0) * x.dim(1);
  std::vector<Real> y(e, Real(0));
  const Real* xv = x.data().data();
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t j = 0; j < e; ++j) y[j] += xv[p * e + j];
  }
  const Real inv = Real(1) / static_cast<Real>(positions);
  for (auto& v : y) v *= inv;
  return Tensor<Real>::from_op({1, 1, e}, std::move(y), {x}, [positions, e, inv](Node<Real>& n) {
    Real* gx = parent_grad(n, 0);
    if (!gx) return;
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t j = 0; j < e; ++j) gx[p * e + j] += n.grad[j] * inv;
    }
  });
}

template <typename Real>
Tensor<Real> sum(const Tensor<Real>& x) {
  Real total = 0;
  for (Real v : x.data()) total += v;
  return Tensor<Real>::from_op({1}, {total}, {x}, [](Node<Real>& n) {
    if (Real* gx = parent_grad(n, 0)) {
      const std::size_t count = n.parents[0]->value.size();
      for (std::size_t i = 0; i < count; ++i) gx[i] += n.grad[0];
    }
  });
}

template <typename Real>
Tensor<Real> mean(const Tensor<Real>& x) {
  return affine(sum(x), 1.0 / static_cast<double>(x.numel()));
}

template <typename Real>
Tensor<Real> weighted_sum(const Tensor<Real>& x, const std::vector<Real>& weights) {
  require(weights.size() == x.numel(), "weighted_sum: weight count mismatch");
  Real total = 0;
  const auto xv = x.data();
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * xv[i];
  return Tensor<Real>::from_op({1}, {total}, {x}, [weights](Node<Real>& n) {
    if (Real* gx = parent_grad(n, 0)) {
      for (std::size_t i = 0; i < weights.size(); ++i) gx[i] += n.grad[0] * weights[i];
    }
  });
}

#define ARRAYSEP_INSTANTIATE_OPS(Real)                                                              \
  template Tensor<Real> add(const Tensor<Real>&, const Tensor<Real>&);                              \
  template Tensor<Real> sub(const Tensor<Real>&, const Tensor<Real>&);                              \
  template Tensor<Real> mul(const Tensor<Real>&, const Tensor<Real>&);                              \
  template Tensor<Real> affine(const Tensor<Real>&, double, double);                                \
  template Tensor<Real> add_last(const Tensor<Real>&, const Tensor<Real>&);                         \
  template Tensor<Real> blend(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&);       \
  template Tensor<Real> relu(const Tensor<Real>&);                                                  \
  template Tensor<Real> sigmoid(const Tensor<Real>&);                                               \
  template Tensor<Real> swish(const Tensor<Real>&);                                                 \
  template Tensor<Real> glu(const Tensor<Real>&);                                                   \
  template Tensor<Real> linear(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&);      \
  template Tensor<Real> layer_norm(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,   \
                                   double);                                                         \
  template Tensor<Real> conv2d(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,       \
                               std::size_t, std::size_t);                                           \
  template Tensor<Real> conv_transpose2d(const Tensor<Real>&, const Tensor<Real>&,                  \
                                         const Tensor<Real>&, std::size_t);                         \
  template Tensor<Real> depthwise_conv1d(const Tensor<Real>&, const Tensor<Real>&,                  \
                                         const Tensor<Real>&);                                      \
  template Tensor<Real> attention(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,    \
                                  std::size_t);                                                     \
  template Tensor<Real> swap_leading(const Tensor<Real>&);                                          \
  template Tensor<Real> pad_end2d(const Tensor<Real>&, std::size_t, std::size_t);                   \
  template Tensor<Real> crop2d(const Tensor<Real>&, std::size_t, std::size_t);                      \
  template Tensor<Real> reshape(const Tensor<Real>&, Shape);                                        \
  template Tensor<Real> concat_last(const std::vector<Tensor<Real>>&);                              \
  template Tensor<Real> slice_last(const Tensor<Real>&, std::size_t, std::size_t);                  \
  template Tensor<Real> global_avg_pool(const Tensor<Real>&);                                       \
  template Tensor<Real> sum(const Tensor<Real>&);                                                   \
  template Tensor<Real> mean(const Tensor<Real>&);                                                  \
  template Tensor<Real> weighted_sum(const Tensor<Real>&, const std::vector<Real>&);

ARRAYSEP_INSTANTIATE_OPS(float)
ARRAYSEP_INSTANTIATE_OPS(double)

#undef ARRAYSEP_INSTANTIATE_OPS

}  // namespace arraysep::nn
