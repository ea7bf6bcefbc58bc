#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_util.hpp"
#include "valvenet/error.hpp"
#include "valvenet/gradcheck.hpp"
#include "valvenet/reference_kernels.hpp"

using namespace valvenet;
using fixtures::dot;
using fixtures::random_conv;
using fixtures::random_tensor;

namespace {

TensorF from(Shape s, std::vector<float> v) { return TensorF(s, std::move(v)); }

struct ConvShape {
  int c_in, k_out, h, w, kernel, stride;
};

const ConvShape kShapes[] = {
    {1, 2, 5, 5, 3, 1}, {2, 3, 6, 7, 3, 2}, {3, 2, 8, 8, 5, 2},
    {2, 2, 4, 4, 1, 1}, {2, 3, 7, 5, 5, 1}, {3, 4, 9, 6, 3, 2},
};

}  // namespace

TEST(Conv, IdentityKernelReproducesInput) {
  const auto x = random_tensor<float>({1, 1, 3, 3}, 1);
  ConvParams<float> p{TensorF({1, 1, 3, 3}), {0.0f}, 1};
  p.weights(0, 0, 1, 1) = 1.0f;
  EXPECT_EQ(conv2d_forward(x, p), x);
}

TEST(Conv, ZeroWeightsGiveBiasPlanes) {
  const auto x = random_tensor<float>({2, 3, 5, 4}, 2);
  ConvParams<float> p{TensorF({2, 3, 3, 3}), {1.5f, -2.0f}, 1};
  const auto y = conv2d_forward(x, p);
  for (int n = 0; n < 2; ++n)
    for (int yy = 0; yy < 5; ++yy)
      for (int xx = 0; xx < 4; ++xx) {
        EXPECT_EQ(y(n, 0, yy, xx), 1.5f);
        EXPECT_EQ(y(n, 1, yy, xx), -2.0f);
      }
}

// Values frozen from the nested-loop reference.
TEST(Conv, AllOnesKernelOnTwoByTwo) {
  const auto x = from({1, 1, 2, 2}, {1, 2, 3, 4});
  ConvParams<float> p{TensorF({1, 1, 3, 3}, 1.0f), {0.0f}, 1};
  EXPECT_EQ(reference::conv2d_forward(x, p), from({1, 1, 2, 2}, {10, 10, 10, 10}));
  EXPECT_EQ(conv2d_forward(x, p), from({1, 1, 2, 2}, {10, 10, 10, 10}));
}

TEST(Conv, OutputShapeUsesCeilOfStride) {
  const auto x = random_tensor<float>({2, 3, 7, 5}, 3);
  const auto p = random_conv<float>(4, 3, 3, 2, 4);
  EXPECT_EQ(conv2d_forward(x, p).shape(), (Shape{2, 4, 4, 3}));
}

TEST(Conv, ChannelMismatchNamesBothShapes) {
  const auto x = random_tensor<float>({1, 2, 4, 4}, 5);
  const auto p = random_conv<float>(1, 3, 3, 1, 6);
  try {
    conv2d_forward(x, p);
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(x.shape().str()), std::string::npos) << msg;
    EXPECT_NE(msg.find(p.weights.shape().str()), std::string::npos) << msg;
  }
}

TEST(Conv, EvenKernelRejected) {
  ConvParams<float> p{TensorF({1, 1, 2, 2}), {0.0f}, 1};
  EXPECT_THROW(p.validate(), ShapeError);
  EXPECT_THROW(conv2d_forward(TensorF({1, 1, 4, 4}), p), ShapeError);
}

TEST(Conv, BackwardRejectsWrongUpstream) {
  const auto x = random_tensor<float>({1, 1, 4, 4}, 1);
  const auto p = random_conv<float>(2, 1, 3, 1, 2);
  EXPECT_THROW(conv2d_backward(x, p, TensorF({1, 2, 3, 4})), ShapeError);
}

TEST(Conv, ZeroUpstreamGivesZeroGradients) {
  const auto x = random_tensor<float>({2, 2, 6, 6}, 7);
  const auto p = random_conv<float>(3, 2, 3, 2, 8);
  const auto g = conv2d_backward(x, p, TensorF({2, 3, 3, 3}));
  for (float v : g.grad_input.values()) EXPECT_EQ(v, 0.0f);
  for (float v : g.grads.weights.values()) EXPECT_EQ(v, 0.0f);
  for (float v : g.grads.bias) EXPECT_EQ(v, 0.0f);
}

TEST(Conv, BiasGradientIsPlaneSum) {
  const auto x = random_tensor<double>({2, 2, 5, 5}, 9);
  const auto p = random_conv<double>(3, 2, 3, 1, 10);
  const auto u = random_tensor<double>({2, 3, 5, 5}, 11);
  const auto g = conv2d_backward(x, p, u);
  for (int k = 0; k < 3; ++k) {
    double s = 0;
    for (int n = 0; n < 2; ++n)
      for (int i = 0; i < 25; ++i) s += u.plane(n, k)[i];
    EXPECT_NEAR(g.grads.bias[k], s, 1e-12);
  }
}

TEST(Conv, FastPathMatchesReference) {
  std::uint64_t seed = 100;
  for (const auto& s : kShapes) {
    const auto x = random_tensor<double>({2, s.c_in, s.h, s.w}, seed++);
    const auto p = random_conv<double>(s.k_out, s.c_in, s.kernel, s.stride, seed++);
    const auto y = conv2d_forward(x, p);
    const auto yr = reference::conv2d_forward(x, p);
    ASSERT_EQ(y.shape(), yr.shape());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], yr[i], 1e-12);
    const auto u = random_tensor<double>(y.shape(), seed++);
    const auto g = conv2d_backward(x, p, u);
    const auto gr = reference::conv2d_backward(x, p, u);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(g.grad_input[i], gr.grad_input[i], 1e-12);
    for (std::size_t i = 0; i < p.weights.size(); ++i)
      EXPECT_NEAR(g.grads.weights[i], gr.grads.weights[i], 1e-12);
    for (int k = 0; k < s.k_out; ++k) EXPECT_NEAR(g.grads.bias[k], gr.grads.bias[k], 1e-12);
  }
}

TEST(Conv, LinearityWithoutBias) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = random_conv<float>(4, 3, 3, 1, seed);
    std::fill(p.bias.begin(), p.bias.end(), 0.0f);
    const auto x = random_tensor<float>({2, 3, 9, 9}, seed + 10);
    const auto y = random_tensor<float>({2, 3, 9, 9}, seed + 20);
    const float a = 0.7f + 0.1f * seed, b = -1.3f;
    TensorF mix(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto lhs = conv2d_forward(mix, p);
    const auto fx = conv2d_forward(x, p), fy = conv2d_forward(y, p);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const double rhs = a * static_cast<double>(fx[i]) + b * static_cast<double>(fy[i]);
      num += (lhs[i] - rhs) * (lhs[i] - rhs);
      den += rhs * rhs;
    }
    EXPECT_LE(std::sqrt(num / den), 1e-5);
  }
}

TEST(Conv, AdjointIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto& s = kShapes[seed];
    auto p = random_conv<float>(s.k_out, s.c_in, s.kernel, s.stride, seed);
    const auto u = random_tensor<float>({2, s.c_in, s.h, s.w}, seed + 30);
    const auto v = random_tensor<float>(conv_output_shape(u.shape(), p), seed + 40);
    std::fill(p.bias.begin(), p.bias.end(), 0.0f);
    const double lhs = dot(conv2d_forward(u, p), v);
    const double rhs = dot(u, conv2d_backward(u, p, v).grad_input);
    EXPECT_LE(std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-12), 1e-4);
  }
}

TEST(Conv, FiniteDifferencesOverShapeMatrix) {
  std::uint64_t seed = 500;
  for (const auto& s : kShapes) {
    for (int rep = 0; rep < 5; ++rep) {
      auto x = random_tensor<double>({2, s.c_in, s.h, s.w}, seed++);
      auto p = random_conv<double>(s.k_out, s.c_in, s.kernel, s.stride, seed++);
      const auto u = random_tensor<double>(conv_output_shape(x.shape(), p), seed++);
      const auto g = conv2d_backward(x, p, u);
      auto loss = [&] { return dot(conv2d_forward(x, p), u); };
      std::vector<GradBlock> blocks{
          {"input", x.values(), g.grad_input.values()},
          {"weights", p.weights.values(), g.grads.weights.values()},
          {"bias", p.bias, g.grads.bias},
      };
      const auto r = grad_check(loss, blocks);
      EXPECT_TRUE(r.passed()) << r.summary();
    }
  }
}

TEST(Conv, ThreadCountDoesNotChangeBits) {
  const auto x = random_tensor<float>({4, 16, 32, 32}, 1);
  const auto p = random_conv<float>(24, 16, 5, 2, 2);
  const auto u = random_tensor<float>(conv_output_shape(x.shape(), p), 3);
  parallel::set_threads(1);
  const auto y1 = conv2d_forward(x, p);
  const auto g1 = conv2d_backward(x, p, u);
  parallel::set_threads(4);
  const auto y4 = conv2d_forward(x, p);
  const auto g4 = conv2d_backward(x, p, u);
  parallel::set_threads(0);
  EXPECT_EQ(y1, y4);
  EXPECT_EQ(g1.grad_input, g4.grad_input);
  EXPECT_EQ(g1.grads.weights, g4.grads.weights);
  EXPECT_EQ(g1.grads.bias, g4.grads.bias);
}

TEST(Relu, Examples) {
  EXPECT_EQ(relu(from({1, 1, 1, 3}, {-1, 0, 2})), from({1, 1, 1, 3}, {0, 0, 2}));
  const auto pos = from({1, 1, 2, 2}, {1, 2, 3, 0.5f});
  EXPECT_EQ(relu(pos), pos);
}

TEST(Relu, BackwardAtZeroIsZero) {
  const auto x = from({1, 1, 1, 3}, {-1, 0, 2});
  const auto u = from({1, 1, 1, 3}, {5, 6, 7});
  EXPECT_EQ(relu_backward(x, u), from({1, 1, 1, 3}, {0, 0, 7}));
}

TEST(Relu, OutputNonNegative) {
  const auto y = relu(random_tensor<float>({2, 3, 8, 8}, 4));
  for (float v : y.values()) EXPECT_GE(v, 0.0f);
}

TEST(Relu, FiniteDifferencesAwayFromZero) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto x = random_tensor<double>({2, 2, 4, 4}, seed);
    for (auto& v : x.values()) {
      if (std::abs(v) < 1e-2) v = 0.5;
    }
    const auto u = random_tensor<double>(x.shape(), seed + 9);
    const auto g = relu_backward(x, u);
    auto loss = [&] { return dot(relu(x), u); };
    std::vector<GradBlock> blocks{{"input", x.values(), g.values()}};
    const auto r = grad_check(loss, blocks);
    EXPECT_TRUE(r.passed()) << r.summary();
  }
}

TEST(ElemwiseMul, Examples) {
  const auto a = from({1, 1, 1, 2}, {2, -3});
  EXPECT_EQ(elemwise_mul(a, from({1, 1, 1, 2}, {1, -1})), from({1, 1, 1, 2}, {2, 3}));

  const auto x = random_tensor<float>({1, 2, 3, 3}, 1);
  const auto u = random_tensor<float>(x.shape(), 2);
  const TensorF ones(x.shape(), 1.0f), zeros(x.shape());
  EXPECT_EQ(elemwise_mul(x, ones), x);
  EXPECT_EQ(elemwise_mul_backward(x, ones, u).first, u);

  EXPECT_EQ(elemwise_mul(x, zeros), zeros);
  const auto [ga, gb] = elemwise_mul_backward(x, zeros, u);
  EXPECT_EQ(ga, zeros);
  EXPECT_EQ(gb, elemwise_mul(u, x));
}

TEST(ElemwiseMul, ShapeMismatch) {
  EXPECT_THROW(elemwise_mul(TensorF({1, 1, 2, 2}), TensorF({1, 1, 2, 3})), ShapeError);
}

TEST(ElemwiseMul, FiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = random_tensor<double>({2, 3, 4, 4}, seed);
    auto b = random_tensor<double>(a.shape(), seed + 1);
    const auto u = random_tensor<double>(a.shape(), seed + 2);
    const auto [ga, gb] = elemwise_mul_backward(a, b, u);
    auto loss = [&] { return dot(elemwise_mul(a, b), u); };
    std::vector<GradBlock> blocks{{"a", a.values(), ga.values()}, {"b", b.values(), gb.values()}};
    const auto r = grad_check(loss, blocks);
    EXPECT_TRUE(r.passed()) << r.summary();
  }
}

TEST(Upsample, Examples) {
  const auto x = random_tensor<float>({2, 3, 4, 5}, 1);
  EXPECT_EQ(upsample_nearest(x, 1), x);
  EXPECT_EQ(upsample_nearest(from({1, 1, 1, 1}, {5}), 2), TensorF({1, 1, 2, 2}, 5.0f));
  EXPECT_EQ(upsample_nearest_backward(TensorF({1, 2, 4, 6}, 1.0f), 2), TensorF({1, 2, 2, 3}, 4.0f));
  EXPECT_THROW(upsample_nearest(x, 0), Error);
}

TEST(Upsample, BackwardOfOnesIsFactorSquared) {
  for (int f = 1; f <= 4; ++f) {
    const auto x = random_tensor<float>({1, 2, 3, 3}, f);
    const auto up = upsample_nearest(x, f);
    const auto g = upsample_nearest_backward(TensorF(up.shape(), 1.0f), f);
    for (float v : g.values()) EXPECT_EQ(v, static_cast<float>(f * f));
  }
}

TEST(Upsample, MatchesReferenceAndFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto x = random_tensor<double>({2, 2, 3, 4}, seed);
    EXPECT_EQ(upsample_nearest(x, 3), reference::upsample_nearest(x, 3));
    const auto u = random_tensor<double>({2, 2, 9, 12}, seed + 1);
    const auto g = upsample_nearest_backward(u, 3);
    EXPECT_EQ(g, reference::upsample_nearest_backward(u, 3));
    auto loss = [&] { return dot(upsample_nearest(x, 3), u); };
    std::vector<GradBlock> blocks{{"input", x.values(), g.values()}};
    const auto r = grad_check(loss, blocks);
    EXPECT_TRUE(r.passed()) << r.summary();
  }
}

TEST(SoftmaxCrossEntropy, Examples) {
  LabelMap label(1, 1, 1, 0);
  const auto r = softmax_cross_entropy(TensorD({1, 2, 1, 1}, 0.0), label);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  const auto sat = softmax_cross_entropy(TensorD({1, 2, 1, 1}, std::vector<double>{30, 0}), label);
  EXPECT_LT(sat.loss, 1e-12);
}

TEST(SoftmaxCrossEntropy, LabelOutOfRangeNamesPixel) {
  LabelMap labels(1, 2, 2, 0);
  labels.at(0, 1, 0) = 7;
  try {
    softmax_cross_entropy(TensorF({1, 3, 2, 2}), labels);
    FAIL();
  } catch (const LabelError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('7'), std::string::npos) << msg;
  }
}

TEST(SoftmaxCrossEntropy, IgnoredPixelsHaveZeroGradient) {
  auto labels = fixtures::random_labels(1, 3, 3, 3, 1);
  labels.at(0, 1, 1) = 255;
  const auto logits = random_tensor<double>({1, 3, 3, 3}, 2);
  const auto r = softmax_cross_entropy(logits, labels, 255);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(r.grad(0, c, 1, 1), 0.0);
}

TEST(SoftmaxCrossEntropy, LargeLogitsStayFinite) {
  const TensorF logits({1, 2, 1, 2}, std::vector<float>{1e4f, -1e4f, -1e4f, 1e4f});
  const auto r = softmax_cross_entropy(logits, LabelMap(1, 1, 2, 1));
  EXPECT_TRUE(std::isfinite(r.loss));
  for (float v : r.grad.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(SoftmaxCrossEntropy, FiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto logits = random_tensor<double>({2, 4, 3, 3}, seed, 2.0);
    const auto labels = fixtures::random_labels(2, 3, 3, 4, seed + 1);
    const auto r = softmax_cross_entropy(logits, labels);
    auto loss = [&] { return softmax_cross_entropy(logits, labels).loss; };
    std::vector<GradBlock> blocks{{"logits", logits.values(), r.grad.values()}};
    const auto rep = grad_check(loss, blocks);
    EXPECT_TRUE(rep.passed()) << rep.summary();
  }
}

TEST(Argmax, TiesGoToLowerIndex) {
  const TensorF logits({1, 3, 1, 2}, std::vector<float>{1, 0, 1, 2, 0, 2});
  const auto m = argmax_channels(logits);
  EXPECT_EQ(m.at(0, 0, 0), 0);
  EXPECT_EQ(m.at(0, 0, 1), 1);
}

TEST(Concat, SplitInvertsConcat) {
  const auto a = random_tensor<float>({2, 3, 4, 4}, 1);
  const auto b = random_tensor<float>({2, 2, 4, 4}, 2);
  const auto [sa, sb] = split_channels(concat_channels(a, b), 3);
  EXPECT_EQ(sa, a);
  EXPECT_EQ(sb, b);
}
