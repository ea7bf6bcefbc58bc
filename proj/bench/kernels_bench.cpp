// Reference (serial direct loops) vs. OpenMP im2col kernels at the shapes of
// the micro-FCN on 64x64 inputs, batch 8.

#include <benchmark/benchmark.h>

#include "valvenet/init.hpp"
#include "valvenet/kernels.hpp"
#include "valvenet/reference_kernels.hpp"

namespace {

using namespace valvenet;

struct Layer {
  int c_in, k_out, size, kernel, stride;
};

// first layer, enc1, enc2, enc3, fused heads
constexpr Layer kLayers[] = {
    {3, 16, 64, 3, 1}, {16, 24, 64, 5, 2}, {24, 32, 32, 5, 2}, {32, 32, 16, 5, 1}, {48, 24, 64, 1, 1},
};
constexpr int kBatch = 8;

struct Case {
  TensorF input;
  ConvParams<float> params;
  TensorF upstream;
};

Case make_case(const Layer& l) {
  Rng rng(7);
  Case c;
  c.params = he_normal_conv<float>(rng, l.k_out, l.c_in, l.kernel, l.kernel, l.stride);
  c.input = TensorF({kBatch, l.c_in, l.size, l.size});
  std::normal_distribution<float> d(0.0f, 1.0f);
  for (auto& v : c.input.values()) v = d(rng);
  c.upstream = TensorF(conv_output_shape(c.input.shape(), c.params));
  for (auto& v : c.upstream.values()) v = d(rng);
  return c;
}

void BM_ConvForward(benchmark::State& st) {
  const Case c = make_case(kLayers[st.range(0)]);
  const bool reference = st.range(1) != 0;
  for (auto _ : st) {
    auto out = reference ? reference::conv2d_forward(c.input, c.params)
                         : conv2d_forward(c.input, c.params);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetLabel(reference ? "reference" : "openmp");
}

void BM_ConvBackward(benchmark::State& st) {
  const Case c = make_case(kLayers[st.range(0)]);
  const bool reference = st.range(1) != 0;
  for (auto _ : st) {
    auto g = reference ? reference::conv2d_backward(c.input, c.params, c.upstream)
                       : conv2d_backward(c.input, c.params, c.upstream);
    benchmark::DoNotOptimize(g.grads.weights.data());
  }
  st.SetLabel(reference ? "reference" : "openmp");
}

void BM_Upsample(benchmark::State& st) {
  TensorF in({kBatch, 32, 16, 16}, 1.0f);
  const bool reference = st.range(0) != 0;
  for (auto _ : st) {
    auto out = reference ? reference::upsample_nearest(in, 4) : upsample_nearest(in, 4);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetLabel(reference ? "reference" : "openmp");
}

void layer_args(benchmark::internal::Benchmark* b) {
  for (int l = 0; l < 5; ++l) {
    for (int ref = 0; ref < 2; ++ref) b->Args({l, ref});
  }
}

BENCHMARK(BM_ConvForward)->Apply(layer_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward)->Apply(layer_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Upsample)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
