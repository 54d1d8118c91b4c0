// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "arraysep/verify/checks.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "arraysep/dsp/stft.h"
#include "arraysep/fusion/fusion.h"
#include "arraysep/nn/layers.h"
#include "arraysep/sdl/sdl.h"
#include "arraysep/separator/separator.h"
#include "arraysep/sim/dataset.h"
#include "arraysep/train/loss.h"
#include "arraysep/train/metrics.h"
#include "arraysep/train/trainer.h"
#include "arraysep/verify/oracles.h"
#include "arraysep/vme/vme.h"

namespace arraysep::verify {

namespace {

using clock_type = std::chrono::steady_clock;
using T = nn::Tensor<double>;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

// Runs `body`, timing it and turning an exception into a failed result.
CheckResult timed(int criterion, const std::string& name,
                  const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.criterion = criterion;
  r.name = name;
  const auto start = clock_type::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = seconds_since(start);
  return r;
}

T leaf(const nn::Shape& shape, nn::Rng& rng, double scale = 1.0) {
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = scale * rng.normal();
  return T::parameter(shape, std::move(v));
}

// Keeps values at least `gap` away from zero so that kinks stay out of reach
// of the finite-difference step.
T leaf_away_from_zero(const nn::Shape& shape, nn::Rng& rng, double gap) {
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) {
    const double r = rng.normal();
    x = r + (r < 0 ? -gap : gap);
  }
  return T::parameter(shape, std::move(v));
}

template <typename Layer>
std::vector<T> params_of(const Layer& layer) {
  nn::ParamSet<double> set;
  layer.collect(set, "p");
  return set.tensors();
}

std::vector<T> join(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

GradCase make_case(std::string name, std::function<T()> f, std::vector<T> wrt,
                   double tolerance = 1e-4, std::size_t coords = 0) {
  GradCase c;
  c.name = std::move(name);
  c.tolerance = tolerance;
  c.run = [f = std::move(f), wrt = std::move(wrt), coords]() {
    nn::GradCheckOptions opt;
    opt.max_coords_per_tensor = coords;
    return nn::grad_check(f, wrt, opt);
  };
  return c;
}

dsp::ComplexSpectrogram random_spectrogram(std::size_t t, std::size_t f, std::size_t c,
                                           std::mt19937_64& eng) {
  std::normal_distribution<double> n(0.0, 1.0);
  dsp::ComplexSpectrogram s(t, f, c);
  for (auto& z : s.data) z = {n(eng), n(eng)};
  return s;
}

dsp::Waveform random_waveform(std::size_t channels, std::size_t samples, int rate,
                              std::mt19937_64& eng) {
  std::normal_distribution<double> n(0.0, 0.3);
  dsp::Waveform w(rate, channels, samples);
  for (auto& ch : w.channels) {
    for (auto& x : ch) x = n(eng);
  }
  return w;
}

sdl::SpatialDictionary<double> dictionary_from(const std::vector<std::vector<dsp::Complex>>& columns,
                                               std::size_t channels) {
  sdl::SpatialDictionary<double> d;
  d.variant = sdl::SdlVariant::kShared;
  d.channels = channels;
  d.atoms = columns.size();
  d.bins = 1;
  std::vector<double> re(channels * d.atoms), im(channels * d.atoms);
  for (std::size_t n = 0; n < d.atoms; ++n) {
    for (std::size_t m = 0; m < channels; ++m) {
      re[m * d.atoms + n] = columns[n][m].real();
      im[m * d.atoms + n] = columns[n][m].imag();
    }
  }
  d.real = T::parameter({channels, d.atoms}, std::move(re));
  d.imag = T::parameter({channels, d.atoms}, std::move(im));
  return d;
}

struct RoundTripStats {
  double worst_db = -1e300;
  std::size_t count_mismatches = 0;
  std::size_t signals = 0;
};

RoundTripStats stft_roundtrip(const dsp::StftConfig& config, std::size_t num_signals,
                              std::size_t length, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  RoundTripStats st;
  const auto run = [&](std::size_t n) {
    const dsp::Waveform w = random_waveform(1, n, config.sample_rate, eng);
    const dsp::ComplexSpectrogram spec = dsp::stft(w, config);
    if (spec.frames != frame_count_oracle(n, config) || spec.bins != config.fft_size() / 2 + 1) {
      ++st.count_mismatches;
    }
    const dsp::Waveform back = dsp::istft(spec, config, n);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = back.channels[0][i] - w.channels[0][i];
      err += d * d;
      ref += w.channels[0][i] * w.channels[0][i];
    }
    const double db = err == 0.0 ? -400.0 : 10.0 * std::log10(err / ref);
    st.worst_db = std::max(st.worst_db, db);
    ++st.signals;
  };
  for (std::size_t i = 0; i < num_signals; ++i) run(length);
  // odd lengths for the counting rule
  std::uniform_int_distribution<std::size_t> len(config.window_length(), 4 * length / 3);
  for (std::size_t i = 0; i < 10; ++i) run(len(eng));
  return st;
}

std::string describe_failures(const std::vector<std::pair<std::string, double>>& failures) {
  std::ostringstream s;
  for (std::size_t i = 0; i < failures.size() && i < 5; ++i) {
    s << (i ? ", " : "") << failures[i].first << "=" << fmt(failures[i].second);
  }
  if (failures.size() > 5) s << ", ...";
  return s.str();
}

}  // namespace

std::string format(const CheckResult& result) {
  std::ostringstream s;
  s << (result.passed ? "PASS" : "FAIL") << " [" << result.criterion << "] " << result.name << ": "
    << result.detail << " (" << std::fixed << std::setprecision(2) << result.seconds << " s)";
  return s.str();
}

// --- gradient cases ----------------------------------------------------------

std::vector<GradCase> kernel_grad_cases(std::uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<GradCase> cases;

  {
    T a = leaf({3, 4, 5}, rng), b = leaf({3, 4, 5}, rng);
    cases.push_back(make_case("add", [=] { return nn::add(a, b); }, {a, b}));
    cases.push_back(make_case("sub", [=] { return nn::sub(a, b); }, {a, b}));
    cases.push_back(make_case("mul", [=] { return nn::mul(a, b); }, {a, b}));
    cases.push_back(make_case("affine", [=] { return nn::affine(a, 1.7, -0.3); }, {a}));
  }
  {
    T a = leaf({4, 5, 6}, rng), b = leaf({6}, rng);
    cases.push_back(make_case("add_last", [=] { return nn::add_last(a, b); }, {a, b}));
  }
  {
    T g = leaf({3, 4, 5}, rng), a = leaf({3, 4, 5}, rng), b = leaf({3, 4, 5}, rng);
    cases.push_back(make_case("blend", [=] { return nn::blend(g, a, b); }, {g, a, b}));
  }
  {
    T x = leaf_away_from_zero({3, 4, 5}, rng, 0.05);
    cases.push_back(make_case("relu", [=] { return nn::relu(x); }, {x}));
    T y = leaf({3, 4, 5}, rng, 2.0);
    cases.push_back(make_case("sigmoid", [=] { return nn::sigmoid(y); }, {y}));
    cases.push_back(make_case("swish", [=] { return nn::swish(y); }, {y}));
    T z = leaf({3, 4, 8}, rng);
    cases.push_back(make_case("glu", [=] { return nn::glu(z); }, {z}));
  }
  {
    T x = leaf({3, 4, 5}, rng), w = leaf({5, 6}, rng), b = leaf({6}, rng);
    cases.push_back(make_case("linear", [=] { return nn::linear(x, w, b); }, {x, w, b}));
    cases.push_back(make_case("linear_nobias", [=] { return nn::linear(x, w, T()); }, {x, w}));
  }
  {
    T x = leaf({4, 6, 8}, rng), g = leaf({8}, rng), b = leaf({8}, rng);
    cases.push_back(make_case("layer_norm", [=] { return nn::layer_norm(x, g, b); }, {x, g, b}));
  }
  {
    T x = leaf({6, 7, 3}, rng), w = leaf({3, 3, 3, 4}, rng, 0.5), b = leaf({4}, rng);
    cases.push_back(make_case("conv2d_s1p1", [=] { return nn::conv2d(x, w, b, 1, 1); }, {x, w, b}));
    T x2 = leaf({7, 8, 2}, rng), w2 = leaf({2, 2, 2, 3}, rng, 0.5), b2 = leaf({3}, rng);
    cases.push_back(make_case("conv2d_s2p0", [=] { return nn::conv2d(x2, w2, b2, 2, 0); }, {x2, w2, b2}));
    T x3 = leaf({5, 6, 2}, rng), w3 = leaf({3, 3, 2, 3}, rng, 0.5);
    cases.push_back(make_case("conv2d_s2p1_nobias", [=] { return nn::conv2d(x3, w3, T(), 2, 1); }, {x3, w3}));
  }
  {
    T x = leaf({3, 4, 3}, rng), w = leaf({2, 2, 3, 2}, rng, 0.5), b = leaf({2}, rng);
    cases.push_back(make_case("conv_transpose2d_k2s2", [=] { return nn::conv_transpose2d(x, w, b, 2); },
                              {x, w, b}));
    T x2 = leaf({3, 3, 2}, rng), w2 = leaf({3, 3, 2, 3}, rng, 0.5), b2 = leaf({3}, rng);
    cases.push_back(make_case("conv_transpose2d_k3s2", [=] { return nn::conv_transpose2d(x2, w2, b2, 2); },
                              {x2, w2, b2}));
  }
  {
    T x = leaf({3, 6, 4}, rng), w = leaf({3, 4}, rng), b = leaf({4}, rng);
    cases.push_back(make_case("depthwise_conv1d", [=] { return nn::depthwise_conv1d(x, w, b); }, {x, w, b}));
  }
  for (std::size_t heads : {1, 2, 4}) {
    T q = leaf({2, 5, 8}, rng), k = leaf({2, 5, 8}, rng), v = leaf({2, 5, 8}, rng);
    cases.push_back(make_case("attention_h" + std::to_string(heads),
                              [=] { return nn::attention(q, k, v, heads); }, {q, k, v}));
  }
  {
    T x = leaf({3, 4, 5}, rng);
    cases.push_back(make_case("swap_leading", [=] { return nn::swap_leading(x); }, {x}));
    cases.push_back(make_case("reshape", [=] { return nn::reshape(x, {12, 5}); }, {x}));
    cases.push_back(make_case("sum", [=] { return nn::sum(x); }, {x}));
    cases.push_back(make_case("mean", [=] { return nn::mean(x); }, {x}));
    std::vector<double> weights(x.numel());
    for (auto& w : weights) w = rng.normal();
    cases.push_back(make_case("weighted_sum", [=] { return nn::weighted_sum(x, weights); }, {x}));
    cases.push_back(make_case("global_avg_pool", [=] { return nn::global_avg_pool(x); }, {x}));
  }
  {
    T x = leaf({3, 4, 2}, rng);
    cases.push_back(make_case("pad_end2d", [=] { return nn::pad_end2d(x, 5, 6); }, {x}));
    T y = leaf({5, 6, 2}, rng);
    cases.push_back(make_case("crop2d", [=] { return nn::crop2d(y, 3, 4); }, {y}));
    T a = leaf({3, 4, 2}, rng), b = leaf({3, 4, 3}, rng);
    cases.push_back(make_case("concat_last", [=] { return nn::concat_last<double>({a, b}); }, {a, b}));
    T s = leaf({3, 4, 6}, rng);
    cases.push_back(make_case("slice_last", [=] { return nn::slice_last(s, 1, 4); }, {s}));
  }
  return cases;
}

std::vector<GradCase> component_grad_cases(std::uint64_t seed) {
  nn::Rng rng(seed);
  std::mt19937_64 eng(seed);
  std::vector<GradCase> cases;

  // spatial dictionary, both variants and both inner products
  {
    const auto spec = std::make_shared<dsp::ComplexSpectrogram>(random_spectrogram(4, 5, 4, eng));
    spec->at(1, 2, 0) = spec->at(1, 2, 1) = spec->at(1, 2, 2) = spec->at(1, 2, 3) = 0.0;  // silent bin
    for (auto variant : {sdl::SdlVariant::kShared, sdl::SdlVariant::kFrequency}) {
      for (auto product : {sdl::InnerProduct::kHermitian, sdl::InnerProduct::kTranspose}) {
        for (bool scaled : {true, false}) {
          const auto dict = sdl::init_dictionary<double>(4, 6, variant, 5, rng);
          const std::string name = "sdl_" + sdl::to_string(variant) + "_" + sdl::to_string(product) +
                                   (scaled ? "_scaled" : "_unit");
          cases.push_back(make_case(name, [=] { return sdl::spatial_embed(*spec, dict, product, scaled); },
                                    {dict.real, dict.imag}));
        }
      }
    }
  }

  fusion::FusionConfig fc;
  fc.embed_dim = 8;
  fc.extractor_kernel = 3;
  fc.aff_bottleneck_ratio = 4;
  fc.aff_iterations = 2;
  {
    fusion::LocalPatternExtractor<double> ext(fc, rng);
    T planes = leaf({5, 6, 2}, rng);
    cases.push_back(make_case("local_pattern_extractor", [=] { return ext(planes); },
                              join({planes}, params_of(ext))));
  }
  {
    fusion::ChannelAttention<double> ca(8, 4, rng);
    T u = leaf({4, 5, 8}, rng);
    cases.push_back(make_case("channel_attention", [=] { return ca(u); }, join({u}, params_of(ca))));
  }
  for (std::size_t iters : {1, 2}) {
    fusion::FusionConfig c = fc;
    c.aff_iterations = iters;
    fusion::AttentionalFusion<double> aff(c, rng);
    T x = leaf({4, 5, 8}, rng), y = leaf({4, 5, 8}, rng);
    cases.push_back(make_case("aff_iter" + std::to_string(iters), [=] { return aff(x, y); },
                              join({x, y}, params_of(aff))));
  }

  nn::ConformerConfig cc;
  cc.model_dim = 8;
  cc.num_heads = 4;
  cc.ff_expansion = 2;
  cc.conv_kernel = 3;
  {
    nn::FeedForward<double> ff(8, 2, rng);
    T x = leaf({3, 5, 8}, rng);
    cases.push_back(make_case("feed_forward", [=] { return ff(x); }, join({x}, params_of(ff))));
  }
  {
    nn::SelfAttention<double> sa(8, 4, rng);
    T x = leaf({3, 5, 8}, rng);
    cases.push_back(make_case("self_attention", [=] { return sa(x); }, join({x}, params_of(sa))));
  }
  {
    nn::ConvModule<double> cm(8, 3, rng);
    T x = leaf({3, 5, 8}, rng);
    cases.push_back(make_case("conv_module", [=] { return cm(x); }, join({x}, params_of(cm))));
  }
  {
    nn::ConformerBlock<double> cb(cc, rng);
    T x = leaf({3, 5, 8}, rng);
    cases.push_back(make_case("conformer_block", [=] { return cb(x); }, join({x}, params_of(cb))));
  }
  {
    separator::DualPathBlock<double> dp(cc, rng);
    T x = leaf({4, 5, 8}, rng);
    cases.push_back(make_case("dual_path_block", [=] { return dp(x); }, join({x}, params_of(dp))));
  }
  {
    separator::PatchMerge<double> pm(8, 16, 2, rng);
    T x = leaf({4, 6, 8}, rng);
    cases.push_back(make_case("patch_merge", [=] { return pm(x); }, join({x}, params_of(pm))));
  }
  {
    separator::PatchExpand<double> pe(16, 8, 2, rng);
    T x = leaf({2, 3, 16}, rng), skip = leaf({3, 5, 8}, rng);
    cases.push_back(make_case("patch_expand", [=] { return pe(x, 3, 5, skip); },
                              join({x, skip}, params_of(pe))));
  }
  {
    separator::SeparatorConfig sc;
    sc.input_dim = 8;
    sc.merge_windows = {1, 2};
    sc.level_dims = {8, 16};
    sc.num_speakers = 2;
    sc.conformer = cc;
    separator::Separator<double> sep(sc, rng);
    T x = leaf({5, 6, 8}, rng);
    cases.push_back(make_case("separator_two_level", [=] { return sep(x); }, join({x}, params_of(sep))));
  }

  {
    dsp::StftConfig sc;
    sc.sample_rate = 500;  // 16-sample window, hop 8
    T packed = leaf({6, 9, 4}, rng);
    cases.push_back(make_case("istft_op", [=] { return train::istft_op(packed, sc, 40); }, {packed}));
  }
  for (std::size_t k : {2, 3}) {
    std::vector<std::vector<double>> refs(k, std::vector<double>(64));
    for (auto& r : refs) {
      for (auto& x : r) x = rng.normal();
    }
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    std::vector<double> est(k * 64);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t n = 0; n < 64; ++n) est[i * 64 + n] = 0.8 * refs[perm[i]][n] + 0.3 * rng.normal();
    }
    T e = T::parameter({k, 64}, est);
    cases.push_back(make_case("si_sdr_loss_k" + std::to_string(k),
                              [=] { return train::si_sdr_loss(e, refs, perm); }, {e}));
  }
  return cases;
}

pipeline::ModelConfig grad_check_model_config() {
  pipeline::ModelConfig c = pipeline::ModelConfig::toy();
  c.stft.sample_rate = 500;
  c.seed = 5;
  return c;
}

GradCase end_to_end_grad_case(const pipeline::ModelConfig& config, const std::string& name,
                              std::size_t channels, std::size_t coords_per_tensor) {
  auto model = std::make_shared<pipeline::SeparationModel<double>>(config);
  std::mt19937_64 eng(config.seed + 101);
  const std::size_t hop = config.stft.hop();
  const dsp::Waveform w = random_waveform(channels, 7 * hop, config.stft.sample_rate, eng);
  const auto spec = std::make_shared<dsp::ComplexSpectrogram>(dsp::stft(w, config.stft));
  return make_case(name, [model, spec] { return model->forward(*spec); }, model->params().tensors(),
                   1e-3, coords_per_tensor);
}

// --- criteria --------------------------------------------------------------

CheckResult check_vme_plan() {
  return timed(1, "vme_plan_oracle", [](CheckResult& r) {
    std::size_t combos = 0, mismatches = 0;
    std::string first;
    for (std::size_t m = 1; m <= 8; ++m) {
      for (std::size_t c = 1; c <= m; ++c) {
        ++combos;
        const vme::VmePlan plan = vme::plan_virtual_mics(c, m);
        const VmeOracle o = vme_oracle(c, m);
        bool ok = plan.pairs == o.pairs && plan.counts == o.counts &&
                  plan.num_virtual == m - c && plan.num_pairs == c &&
                  plan.virtual_mics.size() == o.alphas.size();
        const std::size_t total = std::accumulate(plan.counts.begin(), plan.counts.end(), std::size_t{0});
        ok = ok && total == m - c;
        if (ok && !plan.counts.empty()) {
          const auto [lo, hi] = std::minmax_element(plan.counts.begin(), plan.counts.end());
          ok = *hi - *lo <= 1 && std::is_sorted(plan.counts.rbegin(), plan.counts.rend());
        }
        for (std::size_t i = 0; ok && i < plan.virtual_mics.size(); ++i) {
          const auto& v = plan.virtual_mics[i];
          ok = v.alpha == o.alphas[i] && v.pair < o.pairs.size() && v.first == o.pairs[v.pair].first &&
               v.second == o.pairs[v.pair].second;
        }
        if (!ok) {
          ++mismatches;
          if (first.empty()) first = " first at C=" + std::to_string(c) + " M=" + std::to_string(m);
        }
      }
    }
    r.passed = mismatches == 0;
    r.detail = std::to_string(combos) + " (C, M) pairs, " + std::to_string(mismatches) + " mismatches" + first;
  });
}

CheckResult check_single_channel_degeneracy() {
  return timed(2, "single_channel_degeneracy", [](CheckResult& r) {
    std::mt19937_64 eng(21);
    std::vector<dsp::ComplexSpectrogram> inputs;
    inputs.push_back(random_spectrogram(20, 33, 1, eng));
    inputs.back().at(3, 4, 0) = 0.0;
    inputs.back().at(5, 6, 0) = {-0.0, 0.0};
    inputs.push_back(dsp::stft(random_waveform(1, 16000, 16000, eng)));
    std::size_t compared = 0, differing = 0;
    for (const auto& spec : inputs) {
      for (std::size_t m = 1; m <= 8; ++m) {
        const auto out = vme::augment_channels(spec, m, vme::AugmentMode::kVme);
        if (out.channels != m || out.frames != spec.frames || out.bins != spec.bins) {
          ++differing;
          continue;
        }
        for (std::size_t t = 0; t < spec.frames; ++t) {
          for (std::size_t f = 0; f < spec.bins; ++f) {
            const dsp::Complex ref = spec.at(t, f, 0);
            for (std::size_t c = 0; c < m; ++c) {
              ++compared;
              if (std::memcmp(&ref, &out.at(t, f, c), sizeof(dsp::Complex)) != 0) ++differing;
            }
          }
        }
      }
    }
    r.passed = differing == 0;
    r.detail = std::to_string(compared) + " augmented bins compared bitwise to the real channel, " +
               std::to_string(differing) + " differ";
  });
}

CheckResult check_sdl_invariants() {
  return timed(3, "sdl_invariants", [](CheckResult& r) {
    constexpr std::size_t kT = 100, kF = 100, kM = 8, kN = 64;
    constexpr double kTol = 1e-12;
    std::mt19937_64 eng(31);
    nn::Rng rng(32);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> phase(-M_PI, M_PI);
    nn::NoGradGuard no_grad;
    std::vector<std::string> problems;

    const dsp::ComplexSpectrogram spec = random_spectrogram(kT, kF, kM, eng);
    const auto dict = sdl::init_dictionary<double>(kM, kN, sdl::SdlVariant::kShared, kF, rng);

    // range and agreement with the direct formula, both inner products
    double worst_oracle = 0.0, lo = 1.0, hi = 0.0;
    for (auto product : {sdl::InnerProduct::kHermitian, sdl::InnerProduct::kTranspose}) {
      const T a = sdl::spatial_embed(spec, dict, product, false);
      const auto v = a.data();
      lo = std::min(lo, *std::min_element(v.begin(), v.end()));
      hi = std::max(hi, *std::max_element(v.begin(), v.end()));
      for (std::size_t tf = 0; tf < kT * kF; tf += 7) {
        std::vector<dsp::Complex> x(spec.data.begin() + tf * kM, spec.data.begin() + (tf + 1) * kM);
        for (std::size_t n = 0; n < kN; ++n) {
          const double o = sdl_projection_oracle(dict.column(0, n), x, product == sdl::InnerProduct::kHermitian);
          worst_oracle = std::max(worst_oracle, std::abs(o - v[tf * kN + n]));
        }
      }
    }
    if (lo < 0.0 || hi > 1.0) problems.push_back("range [" + fmt(lo, 17) + ", " + fmt(hi, 17) + "]");
    if (worst_oracle > kTol) problems.push_back("oracle diff " + fmt(worst_oracle));

    // parallel and orthogonal: every bin built from column 0
    const auto d0 = dict.column(0, 0);
    double d0n = 0.0;
    for (const auto& z : d0) d0n += std::norm(z);
    dsp::ComplexSpectrogram par(kT, kF, kM), orth(kT, kF, kM), par_t(kT, kF, kM);
    for (std::size_t tf = 0; tf < kT * kF; ++tf) {
      const dsp::Complex s{nd(eng), nd(eng)};
      std::vector<dsp::Complex> x(kM);
      dsp::Complex proj = 0.0;
      for (std::size_t m = 0; m < kM; ++m) {
        x[m] = {nd(eng), nd(eng)};
        proj += std::conj(d0[m]) * x[m];
      }
      for (std::size_t m = 0; m < kM; ++m) {
        par.data[tf * kM + m] = s * d0[m];
        par_t.data[tf * kM + m] = s * std::conj(d0[m]);
        orth.data[tf * kM + m] = x[m] - d0[m] * proj / d0n;
      }
    }
    double par_err = 0.0, orth_err = 0.0;
    {
      const T a = sdl::spatial_embed(par, dict, sdl::InnerProduct::kHermitian, false);
      const T b = sdl::spatial_embed(par_t, dict, sdl::InnerProduct::kTranspose, false);
      const T c = sdl::spatial_embed(orth, dict, sdl::InnerProduct::kHermitian, false);
      for (std::size_t tf = 0; tf < kT * kF; ++tf) {
        par_err = std::max({par_err, std::abs(a.data()[tf * kN] - 1.0), std::abs(b.data()[tf * kN] - 1.0)});
        orth_err = std::max(orth_err, std::abs(c.data()[tf * kN]));
      }
    }
    if (par_err > kTol) problems.push_back("parallel err " + fmt(par_err));
    if (orth_err > kTol) problems.push_back("orthogonal err " + fmt(orth_err));

    // a common phase on all channels of a bin leaves a' unchanged
    dsp::ComplexSpectrogram rot = spec;
    for (std::size_t tf = 0; tf < kT * kF; ++tf) {
      const dsp::Complex e = std::polar(1.0, phase(eng));
      for (std::size_t m = 0; m < kM; ++m) rot.data[tf * kM + m] *= e;
    }
    double phase_err = 0.0;
    {
      const T a = sdl::spatial_embed(spec, dict, sdl::InnerProduct::kHermitian, false);
      const T b = sdl::spatial_embed(rot, dict, sdl::InnerProduct::kHermitian, false);
      for (std::size_t i = 0; i < a.numel(); ++i) phase_err = std::max(phase_err, std::abs(a.data()[i] - b.data()[i]));
    }
    if (phase_err > kTol) problems.push_back("phase err " + fmt(phase_err));

    // a = x_avg * a'
    double scale_err = 0.0;
    {
      const T a = sdl::spatial_embed(spec, dict, sdl::InnerProduct::kHermitian, true);
      const T ap = sdl::spatial_embed(spec, dict, sdl::InnerProduct::kHermitian, false);
      const auto avg = sdl::average_magnitude(spec);
      for (std::size_t tf = 0; tf < kT * kF; ++tf) {
        for (std::size_t n = 0; n < kN; ++n) {
          const double want = avg[tf] * ap.data()[tf * kN + n];
          scale_err = std::max(scale_err, std::abs(a.data()[tf * kN + n] - want) / std::max(avg[tf], 1.0));
        }
      }
    }
    if (scale_err > kTol) problems.push_back("x_avg scaling err " + fmt(scale_err));

    // hand case: x = (3 + 4j, 0), any column along the first mic
    double hand = 0.0;
    {
      dsp::ComplexSpectrogram x(1, 1, 2);
      x.at(0, 0, 0) = {3.0, 4.0};
      const auto d = dictionary_from({{dsp::Complex{1.0, 0.0}, dsp::Complex{0.0, 0.0}}}, 2);
      hand = sdl::spatial_embed(x, d, sdl::InnerProduct::kHermitian, true).data()[0];
    }
    if (hand != 2.5) problems.push_back("hand case " + fmt(hand, 17));

    r.passed = problems.empty();
    std::ostringstream s;
    s << kT * kF << " bins x " << kN << " atoms; a' in [" << fmt(lo) << ", " << fmt(hi)
      << "], parallel " << fmt(par_err) << ", orthogonal " << fmt(orth_err) << ", phase " << fmt(phase_err)
      << ", hand case a = " << hand;
    for (const auto& p : problems) s << "; " << p;
    r.detail = s.str();
  });
}

CheckResult check_gradient_suite() {
  return timed(4, "gradient_suite", [](CheckResult& r) {
    const auto start = clock_type::now();
    std::vector<GradCase> cases = kernel_grad_cases();
    const std::size_t kernels = cases.size();
    for (auto& c : component_grad_cases()) cases.push_back(std::move(c));
    cases.push_back(end_to_end_grad_case(grad_check_model_config(), "end_to_end_toy"));

    std::vector<std::pair<std::string, double>> failures;
    double worst_unit = 0.0, e2e = 0.0;
    for (const auto& c : cases) {
      const double err = c.run().max_error;
      if (c.tolerance < 1e-3) {
        worst_unit = std::max(worst_unit, err);
      } else {
        e2e = err;
      }
      if (!(err < c.tolerance)) failures.emplace_back(c.name, err);
    }
    const double elapsed = seconds_since(start);
    r.passed = failures.empty() && elapsed < 300.0;
    std::ostringstream s;
    s << kernels << " kernel + " << cases.size() - kernels - 1 << " component cases, worst "
      << fmt(worst_unit) << " (< 1e-4); end-to-end " << fmt(e2e) << " (< 1e-3)";
    if (!failures.empty()) s << "; failing: " << describe_failures(failures);
    if (elapsed >= 300.0) s << "; over the 300 s budget";
    r.detail = s.str();
  });
}

CheckResult check_stft_roundtrip(std::size_t num_signals) {
  return timed(5, "stft_roundtrip", [num_signals](CheckResult& r) {
    const dsp::StftConfig config;
    const RoundTripStats st = stft_roundtrip(config, num_signals, 4 * config.sample_rate, 51);
    r.passed = st.worst_db < -60.0 && st.count_mismatches == 0;
    r.detail = std::to_string(st.signals) + " signals, worst error " + fmt(st.worst_db, 4) + " dB, " +
               std::to_string(st.count_mismatches) + " frame/bin count mismatches";
  });
}

CheckResult check_upit_oracle(std::size_t num_sets) {
  return timed(6, "upit_oracle", [num_sets](CheckResult& r) {
    std::mt19937_64 eng(61);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> noise_level(0.02, 3.0);
    std::size_t sets = 0, mismatches = 0, non_identity = 0;
    for (std::size_t k : {2, 3}) {
      for (std::size_t s = 0; s < num_sets; ++s) {
        const std::size_t n = 400 + s;
        std::vector<std::vector<double>> refs(k, std::vector<double>(n));
        for (auto& ref : refs) {
          for (auto& x : ref) x = nd(eng);
        }
        if (s % 10 == 9) refs[1] = refs[0];  // exact ties
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), eng);
        std::vector<std::vector<double>> est(k, std::vector<double>(n));
        const double sigma = noise_level(eng);
        for (std::size_t i = 0; i < k; ++i) {
          const double gain = 0.2 + std::abs(nd(eng));
          for (std::size_t j = 0; j < n; ++j) est[i][j] = gain * refs[perm[i]][j] + sigma * nd(eng);
        }
        const train::UpitResult got = train::upit_loss(est, refs);
        const train::UpitResult want = upit_oracle(est, refs);
        ++sets;
        if (got.loss != want.loss || got.perm != want.perm || got.per_speaker != want.per_speaker) ++mismatches;
        if (!std::is_sorted(got.perm.begin(), got.perm.end())) ++non_identity;
      }
    }
    r.passed = mismatches == 0;
    r.detail = std::to_string(sets) + " sets (K = 2, 3), " + std::to_string(mismatches) +
               " differ from enumeration, " + std::to_string(non_identity) + " non-identity optima";
  });
}

CheckResult check_shape_contract(const pipeline::ModelConfig& config) {
  return timed(7, "shape_contract", [&config](CheckResult& r) {
    const pipeline::SeparationModel<float> model(config);
    const std::size_t k = config.separator.num_speakers;
    std::mt19937_64 eng(71);
    nn::NoGradGuard no_grad;
    std::vector<std::string> problems;
    const std::size_t n = config.stft.sample_rate + 137;  // not a hop multiple
    for (std::size_t c = 1; c <= config.max_channels; ++c) {
      const dsp::Waveform w = random_waveform(c, n, config.stft.sample_rate, eng);
      const dsp::ComplexSpectrogram spec = dsp::stft(w, config.stft);
      const auto out = model.forward(spec);
      const nn::Shape want{spec.frames, spec.bins, 2 * k};
      bool ok = out.shape() == want;
      const auto waves = model.separate(w);
      ok = ok && waves.size() == k;
      for (const auto& wave : waves) {
        ok = ok && wave.num_channels() == 1 && wave.num_samples() == n;
        for (double x : wave.channels.at(0)) ok = ok && std::isfinite(x);
      }
      if (!ok) problems.push_back("C=" + std::to_string(c) + " gave " + nn::to_string(out.shape()));
    }
    r.passed = problems.empty();
    r.detail = "C = 1.." + std::to_string(config.max_channels) + " through one " +
               pipeline::to_string(config.spatial) + "/" + vme::to_string(config.augment) +
               " model, outputs T x F x " + std::to_string(2 * k) + " and " + std::to_string(k) +
               " waveforms of " + std::to_string(n) + " samples";
    for (const auto& p : problems) r.detail += "; " + p;
  });
}

OverfitReport run_toy_overfit(const OverfitOptions& options) {
  OverfitReport report;
  report.result = timed(8, "toy_overfit", [&](CheckResult& r) {
    pipeline::ModelConfig mc = pipeline::ModelConfig::toy();
    mc.seed = options.model_seed;

    sim::DatasetSpec ds;
    ds.geometry = options.geometry;
    ds.num_scenes = options.num_scenes;
    ds.num_speakers = 2;
    ds.duration_s = options.duration_s;
    ds.seed = options.data_seed;
    ds.params.t60_s = 0.3;
    ds.params.snr_db = 20.0;
    ds.params.overlap_ratio = 1.0;
    std::vector<train::TrainScene> scenes;
    for (const auto& s : sim::synth_dataset(ds)) scenes.push_back(train::make_train_scene(s, mc.stft));

    train::TrainConfig tc;
    tc.steps = options.steps;
    tc.batch_size = 1;

    // two independent short runs from the same seed
    std::vector<std::vector<double>> short_runs;
    std::vector<std::vector<float>> short_params;
    for (int rep = 0; rep < 2; ++rep) {
      pipeline::SeparationModel<float> m(mc);
      train::Trainer<float> trainer(m, tc);
      std::vector<double> losses;
      for (const auto& s : train::run_training(trainer, scenes, options.determinism_steps, 1, nullptr)) {
        losses.push_back(s.loss);
      }
      short_runs.push_back(losses);
      std::vector<float> flat;
      for (const auto& t : m.params().tensors()) flat.insert(flat.end(), t.data().begin(), t.data().end());
      short_params.push_back(std::move(flat));
    }
    const bool params_equal =
        short_params[0].size() == short_params[1].size() &&
        std::memcmp(short_params[0].data(), short_params[1].data(), short_params[0].size() * sizeof(float)) == 0;

    pipeline::SeparationModel<float> model(mc);
    train::Trainer<float> trainer(model, tc);
    std::unique_ptr<train::TrainingLog> log;
    if (!options.log_path.empty()) log = std::make_unique<train::TrainingLog>(options.log_path);

    const auto start = clock_type::now();
    report.initial_si_sdr_db = train::mean_upit_si_sdr(model, scenes);
    const auto results = train::run_training(
        trainer, scenes, options.steps, 1, log.get(),
        [&](std::size_t step, const train::StepResult& s, double wall) {
          if (options.progress && (step % 25 == 0 || step == 1)) {
            *options.progress << "  step " << step << " loss " << fmt(s.loss, 4) << " grad_norm "
                              << fmt(s.grad_norm) << " " << fmt(wall, 4) << " s" << std::endl;
          }
        });
    report.final_si_sdr_db = train::mean_upit_si_sdr(model, scenes);
    report.train_seconds = seconds_since(start);
    for (const auto& s : results) report.losses.push_back(s.loss);

    bool prefix_equal = short_runs[0] == short_runs[1];
    for (std::size_t i = 0; i < short_runs[0].size() && i < report.losses.size(); ++i) {
      prefix_equal = prefix_equal && short_runs[0][i] == report.losses[i];
    }
    report.deterministic = prefix_equal && params_equal;

    const double gain = report.final_si_sdr_db - report.initial_si_sdr_db;
    r.passed = gain >= options.required_gain_db && report.deterministic &&
               report.train_seconds < options.time_budget_s;
    std::ostringstream s;
    s << options.steps << " steps: SI-SDR " << fmt(report.initial_si_sdr_db, 4) << " -> "
      << fmt(report.final_si_sdr_db, 4) << " dB (gain " << fmt(gain, 4) << ", need "
      << options.required_gain_db << "), " << (report.deterministic ? "deterministic" : "NOT deterministic")
      << ", " << fmt(report.train_seconds, 4) << " s of " << options.time_budget_s;
    r.detail = s.str();
  });
  return report;
}

CheckResult check_ablations() {
  return timed(9, "ablation_switches", [](CheckResult& r) {
    std::vector<std::string> parts;
    bool ok = true;
    for (const std::string mode : {"augment=zero_pad", "spatial=off"}) {
      const auto eq = mode.find('=');
      pipeline::ModelConfig grad_cfg = grad_check_model_config();
      grad_cfg.set(mode.substr(0, eq), mode.substr(eq + 1));
      const double err = end_to_end_grad_case(grad_cfg, mode).run().max_error;

      pipeline::ModelConfig cfg = pipeline::ModelConfig::toy();
      cfg.set(mode.substr(0, eq), mode.substr(eq + 1));
      const RoundTripStats st = stft_roundtrip(cfg.stft, 10, 4 * cfg.stft.sample_rate, 91);
      const CheckResult shape = check_shape_contract(cfg);

      const bool mode_ok = err < 1e-3 && st.worst_db < -60.0 && st.count_mismatches == 0 && shape.passed;
      ok = ok && mode_ok;
      parts.push_back(mode + ": grad " + fmt(err) + ", stft " + fmt(st.worst_db, 4) + " dB, shapes " +
                      (shape.passed ? "ok" : shape.detail));
    }
    r.passed = ok;
    r.detail = parts[0] + "; " + parts[1];
  });
}

CheckResult check_hierarchy_economy() {
  return timed(10, "hierarchy_economy", [](CheckResult& r) {
    const pipeline::ModelConfig cfg = pipeline::ModelConfig::toy();
    const pipeline::SeparationModel<float> model(cfg);
    const auto& sc = cfg.separator;
    std::mt19937_64 eng(101);
    // T = 10 frames, F = 257 bins; padded to 12 x 260 by the total factor 4
    const dsp::Waveform w = random_waveform(2, 9 * cfg.stft.hop(), cfg.stft.sample_rate, eng);
    const dsp::ComplexSpectrogram spec = dsp::stft(w, cfg.stft);
    const auto grids = separator::level_grids(sc, spec.frames, spec.bins);
    const std::size_t level = grids.size() - 1;
    const std::string tag = "enc" + std::to_string(level);

    nn::NoGradGuard no_grad;
    std::size_t level_seq = 0, level_total = 0;
    {
      nn::AttentionCounter counter;
      model.forward(spec);
      for (const auto& rec : counter.records()) {
        if (rec.label.rfind(tag + ".", 0) == 0) {
          level_seq += rec.entries_per_sequence();
          level_total += rec.score_entries();
        }
      }
    }

    // hypothetical dual-path block at full resolution on the same padded grid
    const std::size_t factor = sc.total_factor();
    const std::size_t full_rows = (spec.frames + factor - 1) / factor * factor;
    const std::size_t full_cols = (spec.bins + factor - 1) / factor * factor;
    nn::Rng rng(102);
    const separator::DualPathBlock<float> full(sc.conformer_for(sc.input_dim), rng);
    std::size_t full_seq = 0, full_total = 0;
    {
      nn::AttentionCounter counter;
      full(nn::Tensor<float>({full_rows, full_cols, sc.input_dim}), "full");
      for (const auto& rec : counter.records()) {
        full_seq += rec.entries_per_sequence();
        full_total += rec.score_entries();
      }
    }
    const std::size_t per_axis = factor;
    r.passed = level_seq > 0 && level_seq * per_axis * per_axis == full_seq;
    std::ostringstream s;
    s << tag << " on " << grids[level].rows << " x " << grids[level].cols << " vs full block on " << full_rows
      << " x " << full_cols << ": per-sequence score entries " << level_seq << " / " << full_seq << " = 1/"
      << fmt(static_cast<double>(full_seq) / std::max<std::size_t>(level_seq, 1), 6) << " (want 1/"
      << per_axis * per_axis << "); all sequences " << level_total << " / " << full_total;
    r.detail = s.str();
  });
}

std::vector<CheckResult> run_suite(bool include_training, std::ostream& out,
                                   const std::string& training_log) {
  std::vector<CheckResult> results;
  const auto emit = [&](CheckResult r) {
    out << format(r) << std::endl;
    results.push_back(std::move(r));
  };
  emit(check_vme_plan());
  emit(check_single_channel_degeneracy());
  emit(check_sdl_invariants());
  emit(check_gradient_suite());
  emit(check_stft_roundtrip());
  emit(check_upit_oracle());
  emit(check_shape_contract(pipeline::ModelConfig::toy()));
  if (include_training) {
    OverfitOptions opt;
    opt.progress = &out;
    opt.log_path = training_log;
    emit(run_toy_overfit(opt).result);
  }
  emit(check_ablations());
  emit(check_hierarchy_economy());
  return results;
}

}  // namespace arraysep::verify
