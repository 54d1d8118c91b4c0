// Copyright 2026 arraysep authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <filesystem>

#include "arraysep/nn/layers.h"
#include "arraysep/nn/ops.h"
#include "arraysep/nn/params.h"
#include "arraysep/nn/serialize.h"
#include "arraysep/verify/checks.h"

namespace nn = arraysep::nn;
namespace verify = arraysep::verify;

namespace {

using T = nn::Tensor<double>;

T random_tensor(nn::Shape shape, nn::Rng& rng) {
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = rng.normal();
  return T(std::move(shape), std::move(v));
}

std::string test_name(const std::string& raw) {
  std::string out;
  for (char c : raw) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

const std::vector<verify::GradCase>& all_cases() {
  static const std::vector<verify::GradCase> cases = [] {
    auto v = verify::kernel_grad_cases();
    for (auto& c : verify::component_grad_cases()) v.push_back(std::move(c));
    return v;
  }();
  return cases;
}

}  // namespace

class GradCaseTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradCaseTest, AnalyticMatchesCentralDifferences) {
  const auto& c = all_cases()[GetParam()];
  const auto r = c.run();
  EXPECT_GT(r.evaluations, 0u);
  EXPECT_LT(r.max_error, c.tolerance) << c.name;
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradCaseTest, ::testing::Range<std::size_t>(0, all_cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return std::to_string(info.param) + "_" + test_name(all_cases()[info.param].name);
                         });

TEST(Ops, LinearMatchesDirectSum) {
  nn::Rng rng(1);
  const T x = random_tensor({2, 3, 4}, rng), w = random_tensor({4, 5}, rng), b = random_tensor({5}, rng);
  const T y = nn::linear(x, w, b);
  ASSERT_EQ(y.shape(), (nn::Shape{2, 3, 5}));
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t o = 0; o < 5; ++o) {
      double s = b.data()[o];
      for (std::size_t i = 0; i < 4; ++i) s += x.data()[r * 4 + i] * w.data()[i * 5 + o];
      EXPECT_NEAR(y.data()[r * 5 + o], s, 1e-12);
    }
  }
}

TEST(Ops, LayerNormNormalizesTheLastAxis) {
  nn::Rng rng(2);
  const T x = random_tensor({3, 6}, rng), g = random_tensor({6}, rng), b = random_tensor({6}, rng);
  const T y = nn::layer_norm(x, g, b, 1e-5);
  for (std::size_t r = 0; r < 3; ++r) {
    double mu = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 6; ++i) mu += x.data()[r * 6 + i] / 6.0;
    for (std::size_t i = 0; i < 6; ++i) var += std::pow(x.data()[r * 6 + i] - mu, 2) / 6.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const double want = (x.data()[r * 6 + i] - mu) / std::sqrt(var + 1e-5) * g.data()[i] + b.data()[i];
      EXPECT_NEAR(y.data()[r * 6 + i], want, 1e-12);
    }
  }
}

TEST(Ops, Conv2dMatchesNaiveLoops) {
  nn::Rng rng(3);
  const std::size_t h = 7, w = 6, ci = 3, co = 4, k = 3, stride = 2, pad = 1;
  const T x = random_tensor({h, w, ci}, rng), wt = random_tensor({k, k, ci, co}, rng), b = random_tensor({co}, rng);
  const T y = nn::conv2d(x, wt, b, stride, pad);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
  ASSERT_EQ(y.shape(), (nn::Shape{oh, ow, co}));
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j)
      for (std::size_t o = 0; o < co; ++o) {
        double s = b.data()[o];
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t bb = 0; bb < k; ++bb) {
            const long r = static_cast<long>(i * stride + a) - static_cast<long>(pad);
            const long c = static_cast<long>(j * stride + bb) - static_cast<long>(pad);
            if (r < 0 || c < 0 || r >= static_cast<long>(h) || c >= static_cast<long>(w)) continue;
            for (std::size_t q = 0; q < ci; ++q) {
              s += x.data()[(r * w + c) * ci + q] * wt.data()[((a * k + bb) * ci + q) * co + o];
            }
          }
        EXPECT_NEAR(y.data()[(i * ow + j) * co + o], s, 1e-12);
      }
}

TEST(Ops, ConvTransposeScattersEveryInput) {
  nn::Rng rng(4);
  const std::size_t h = 3, w = 4, ci = 2, co = 3, k = 2, s = 2;
  const T x = random_tensor({h, w, ci}, rng), wt = random_tensor({k, k, ci, co}, rng), b = random_tensor({co}, rng);
  const T y = nn::conv_transpose2d(x, wt, b, s);
  const std::size_t oh = (h - 1) * s + k, ow = (w - 1) * s + k;
  ASSERT_EQ(y.shape(), (nn::Shape{oh, ow, co}));
  std::vector<double> want(oh * ow * co);
  for (std::size_t r = 0; r < oh * ow; ++r)
    for (std::size_t o = 0; o < co; ++o) want[r * co + o] = b.data()[o];
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t bb = 0; bb < k; ++bb)
          for (std::size_t q = 0; q < ci; ++q)
            for (std::size_t o = 0; o < co; ++o) {
              want[((i * s + a) * ow + j * s + bb) * co + o] +=
                  x.data()[(i * w + j) * ci + q] * wt.data()[((a * k + bb) * ci + q) * co + o];
            }
  for (std::size_t n = 0; n < want.size(); ++n) EXPECT_NEAR(y.data()[n], want[n], 1e-12);
}

TEST(Ops, DepthwiseConvIsCenteredCorrelation) {
  nn::Rng rng(5);
  const std::size_t bsz = 2, len = 6, d = 3, k = 3;
  const T x = random_tensor({bsz, len, d}, rng), wt = random_tensor({k, d}, rng), b = random_tensor({d}, rng);
  const T y = nn::depthwise_conv1d(x, wt, b);
  for (std::size_t n = 0; n < bsz; ++n)
    for (std::size_t l = 0; l < len; ++l)
      for (std::size_t c = 0; c < d; ++c) {
        double s = b.data()[c];
        for (std::size_t j = 0; j < k; ++j) {
          const long src = static_cast<long>(l + j) - static_cast<long>(k / 2);
          if (src < 0 || src >= static_cast<long>(len)) continue;
          s += wt.data()[j * d + c] * x.data()[(n * len + src) * d + c];
        }
        EXPECT_NEAR(y.data()[(n * len + l) * d + c], s, 1e-12);
      }
}

TEST(Ops, AttentionMatchesNaiveSoftmax) {
  nn::Rng rng(6);
  const std::size_t bsz = 2, len = 5, d = 8;
  for (std::size_t heads : {1u, 2u, 4u}) {
    const T q = random_tensor({bsz, len, d}, rng), k = random_tensor({bsz, len, d}, rng),
            v = random_tensor({bsz, len, d}, rng);
    const T y = nn::attention(q, k, v, heads);
    const std::size_t hd = d / heads;
    for (std::size_t n = 0; n < bsz; ++n)
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < len; ++i) {
          std::vector<double> score(len);
          double mx = -1e300;
          for (std::size_t j = 0; j < len; ++j) {
            double s = 0.0;
            for (std::size_t e = 0; e < hd; ++e) {
              s += q.data()[(n * len + i) * d + h * hd + e] * k.data()[(n * len + j) * d + h * hd + e];
            }
            score[j] = s / std::sqrt(static_cast<double>(hd));
            mx = std::max(mx, score[j]);
          }
          double z = 0.0;
          for (auto& s : score) z += (s = std::exp(s - mx));
          for (std::size_t e = 0; e < hd; ++e) {
            double o = 0.0;
            for (std::size_t j = 0; j < len; ++j) o += score[j] / z * v.data()[(n * len + j) * d + h * hd + e];
            EXPECT_NEAR(y.data()[(n * len + i) * d + h * hd + e], o, 1e-12);
          }
        }
  }
}

TEST(Ops, UnsupportedHeadWidthThrows) {
  const T x({1, 2, 9});
  EXPECT_THROW(nn::attention(x, x, x, 1), std::invalid_argument);  // width 9
  EXPECT_THROW(nn::attention(x, x, x, 2), std::invalid_argument);  // 9 % 2 != 0
}

TEST(Ops, ShapeMismatchThrows) {
  EXPECT_THROW(nn::add(T({2, 3}), T({3, 2})), std::invalid_argument);
  EXPECT_THROW(nn::linear(T({2, 3}), T({4, 2}), T()), std::invalid_argument);
}

TEST(Ops, NoGradGuardDropsHistory) {
  auto p = nn::Tensor<double>::parameter({2}, {1.0, 2.0});
  {
    nn::NoGradGuard guard;
    const auto y = nn::sum(nn::mul(p, p));
    EXPECT_TRUE(y.node()->parents.empty());
  }
  const auto y = nn::sum(nn::mul(p, p));
  y.backward();
  EXPECT_DOUBLE_EQ(p.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(p.grad()[1], 4.0);
}

TEST(Layers, FloatAndDoubleConformerAgree) {
  nn::ConformerConfig cc;
  cc.model_dim = 8;
  cc.num_heads = 2;
  cc.ff_expansion = 2;
  cc.conv_kernel = 3;
  nn::Rng r1(9), r2(9);
  const nn::ConformerBlock<double> bd(cc, r1);
  const nn::ConformerBlock<float> bf(cc, r2);
  nn::Rng xr(10);
  const T x = random_tensor({3, 6, 8}, xr);
  std::vector<float> xf(x.data().begin(), x.data().end());
  const auto yd = bd(x);
  const auto yf = bf(nn::Tensor<float>({3, 6, 8}, xf));
  for (std::size_t i = 0; i < yd.numel(); ++i) EXPECT_NEAR(yf.data()[i], yd.data()[i], 1e-4);
}

TEST(Layers, ConformerRejectsBadConfig) {
  nn::ConformerConfig cc;
  cc.model_dim = 6;
  cc.num_heads = 4;
  EXPECT_THROW(cc.validate(), std::invalid_argument);
  cc = {};
  cc.conv_kernel = 4;
  EXPECT_THROW(cc.validate(), std::invalid_argument);
}

TEST(Serialize, ContainerRoundTrip) {
  nn::ConformerConfig cc;
  nn::Rng r1(11), r2(12);
  const nn::ConformerBlock<float> a(cc, r1), b(cc, r2);
  nn::ParamSet<float> pa, pb;
  a.collect(pa, "block");
  b.collect(pb, "block");
  nn::ParamContainer c;
  c.fingerprint = "unit";
  c.step = 17;
  c.records = nn::to_records(pa);
  const auto path = (std::filesystem::temp_directory_path() / "arraysep_test_nn.bin").string();
  nn::write_container(path, c);
  const auto back = nn::read_container(path);
  EXPECT_EQ(back.fingerprint, "unit");
  EXPECT_EQ(back.step, 17u);
  nn::load_records(pb, back.records);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const auto x = pa.entries()[i].tensor.data(), y = pb.entries()[i].tensor.data();
    ASSERT_TRUE(std::equal(x.begin(), x.end(), y.begin())) << pa.entries()[i].name;
  }
  auto wrong = back.records;
  wrong.pop_back();
  EXPECT_THROW(nn::load_records(pb, wrong), std::exception);
}

TEST(Serialize, TruncatedFileThrows) {
  const auto path = (std::filesystem::temp_directory_path() / "arraysep_test_nn_trunc.bin").string();
  nn::ParamContainer c;
  c.records.push_back({"w", {4}, {1, 2, 3, 4}});
  nn::write_container(path, c);
  std::filesystem::resize_file(path, 30);
  EXPECT_THROW(nn::read_container(path), nn::SerializeError);
}

TEST(Instrumentation, CounterRecordsLabelledCalls) {
  nn::AttentionCounter counter;
  const T q({3, 5, 8});
  {
    nn::AttentionLabel label("probe");
    nn::attention(q, q, q, 2);
  }
  nn::attention(q, q, q, 4);
  ASSERT_EQ(counter.records().size(), 2u);
  const auto& r = counter.records()[0];
  EXPECT_EQ(r.label, "probe");
  EXPECT_EQ(r.batch, 3u);
  EXPECT_EQ(r.heads, 2u);
  EXPECT_EQ(r.length, 5u);
  EXPECT_EQ(r.score_entries(), 150u);
  EXPECT_EQ(r.entries_per_sequence(), 50u);
  EXPECT_EQ(counter.records()[1].heads, 4u);
}
