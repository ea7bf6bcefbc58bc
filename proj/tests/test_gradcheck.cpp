#include <gtest/gtest.h>

#include <cstdint>

#include "test_util.hpp"
#include "valvenet/gradcheck.hpp"

using namespace valvenet;

TEST(GradCheck, LinearMapAgreesToMachinePrecision) {
  std::vector<double> x{0.3, -1.2, 2.5};
  const std::vector<double> analytic{3.0, 3.0, 3.0};
  auto loss = [&] { return 3.0 * (x[0] + x[1] + x[2]); };
  std::vector<GradBlock> blocks{{"x", x, analytic}};
  const auto r = grad_check(loss, blocks);
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.max_rel_error(), 1e-9);
  EXPECT_EQ(r.checked(), 3u);
}

TEST(GradCheck, PerturbationIsRestored) {
  std::vector<double> x{1.0, 2.0};
  const std::vector<double> analytic{2.0, 4.0};
  auto loss = [&] { return x[0] * x[0] + x[1] * x[1]; };
  std::vector<GradBlock> blocks{{"x", x, analytic}};
  grad_check(loss, blocks);
  EXPECT_EQ(x, (std::vector<double>{1.0, 2.0}));
}

TEST(GradCheck, WrongGradientIsReportedNotThrown) {
  std::vector<double> x{1.0};
  const std::vector<double> analytic{5.0};
  auto loss = [&] { return x[0] * x[0]; };
  std::vector<GradBlock> blocks{{"x", x, analytic}};
  const auto r = grad_check(loss, blocks);
  EXPECT_FALSE(r.passed());
  EXPECT_NEAR(r.blocks[0].max_rel_error, 0.6, 1e-6);
  EXPECT_NE(r.summary().find("FAIL"), std::string::npos);
}

// Regression fixture: conv2d on a 1x2x5x5 input.
TEST(GradCheck, ConvOnOneByTwoByFiveByFive) {
  auto x = fixtures::random_tensor<double>({1, 2, 5, 5}, 42);
  auto p = fixtures::random_conv<double>(3, 2, 3, 1, 43);
  const auto u = fixtures::random_tensor<double>({1, 3, 5, 5}, 44);
  const auto g = conv2d_backward(x, p, u);
  auto loss = [&] { return fixtures::dot(conv2d_forward(x, p), u); };
  std::vector<GradBlock> blocks{{"input", x.values(), g.grad_input.values()},
                                {"weights", p.weights.values(), g.grads.weights.values()},
                                {"bias", p.bias, g.grads.bias}};
  const auto r = grad_check(loss, blocks);
  EXPECT_TRUE(r.passed()) << r.summary();
  EXPECT_LT(r.max_rel_error(), 1e-4);
  EXPECT_EQ(r.checked(), 50u + 54u + 3u);
}

TEST(GradCheck, ReluAtExactZeroIsExcluded) {
  TensorD x({1, 1, 1, 3}, std::vector<double>{-0.5, 0.0, 0.7});
  const TensorD u({1, 1, 1, 3}, 1.0);
  const auto g = relu_backward(x, u);
  auto signature = [&] {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s = (s << 1) | (x[i] > 0);
    return s;
  };
  auto loss = [&] { return fixtures::dot(relu(x), u); };
  std::vector<GradBlock> blocks{{"input", x.values(), g.values()}};
  GradCheckOptions o;
  o.kink_signature = signature;
  const auto r = grad_check(loss, blocks, o);
  EXPECT_TRUE(r.passed()) << r.summary();
  EXPECT_EQ(r.skipped(), 1u);
  EXPECT_EQ(r.checked(), 2u);
}

TEST(GradCheck, MaxEntriesSubsamples) {
  std::vector<double> x(100, 1.0), analytic(100, 1.0);
  auto loss = [&] {
    double s = 0;
    for (double v : x) s += v;
    return s;
  };
  std::vector<GradBlock> blocks{{"x", x, analytic}};
  GradCheckOptions o;
  o.max_entries_per_block = 10;
  EXPECT_EQ(grad_check(loss, blocks, o).checked(), 10u);
}

TEST(GradCheck, RelativeErrorUsesFloor) {
  EXPECT_DOUBLE_EQ(relative_error(1e-9, 2e-9, 1e-6), 1e-3);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0, 1e-6), 0.5);
}
