#pragma once

// Numerical kernels with analytic backward passes.
//
// Every kernel here is a pure function of its arguments. The convolution
// kernels run im2col + GEMM-style loops parallelised with OpenMP over
// independent output rows; every reduction is performed by a single thread in
// a fixed order, so results are bit-identical for any thread count. The
// direct nested-loop versions in reference_kernels.hpp are kept as the
// oracle for tests and the baseline for bench/.

#include <optional>
#include <utility>
#include <vector>

#include "valvenet/tensor.hpp"

namespace valvenet {

/// Weights [k_out, c_in, kh, kw] plus one bias per output channel.
/// Padding is always symmetric "same" padding of kh/2, kw/2.
template <typename T>
struct ConvParams {
  Tensor<T> weights;
  std::vector<T> bias;
  int stride = 1;

  int out_channels() const { return weights.shape().n; }
  int in_channels() const { return weights.shape().c; }
  int kernel_h() const { return weights.shape().h; }
  int kernel_w() const { return weights.shape().w; }

  /// Throws ShapeError for even kernels, bias length mismatch or stride < 1.
  void validate() const;

  template <typename U>
  ConvParams<U> cast() const {
    return {weights.template cast<U>(), std::vector<U>(bias.begin(), bias.end()),
            stride};
  }
};

template <typename T>
struct ConvGrads {
  Tensor<T> weights;
  std::vector<T> bias;
};

template <typename T>
struct ConvBackward {
  Tensor<T> grad_input;  // empty when not requested
  ConvGrads<T> grads;
};

/// Output extent along one axis for same padding: ceil(extent / stride).
inline int conv_out_extent(int extent, int stride) {
  return (extent + stride - 1) / stride;
}

template <typename T>
Shape conv_output_shape(const Shape& input, const ConvParams<T>& p);

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p);

template <typename T>
ConvBackward<T> conv2d_backward(const Tensor<T>& input, const ConvParams<T>& p,
                                const Tensor<T>& upstream,
                                bool want_input_grad = true);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Passes upstream where input > 0; the derivative at exactly 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& upstream);

template <typename T>
Tensor<T> elemwise_mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> elemwise_mul_backward(const Tensor<T>& a,
                                                      const Tensor<T>& b,
                                                      const Tensor<T>& upstream);

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, int factor);

template <typename T>
Tensor<T> upsample_nearest_backward(const Tensor<T>& upstream, int factor);

/// Concatenates along the channel axis: [a; b].
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Splits a gradient of concat_channels back into its two parts.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& upstream,
                                               int first_channels);

template <typename T>
struct LossResult {
  T loss = T(0);
  Tensor<T> grad;
};

/// Mean per-pixel softmax cross-entropy over non-ignored pixels and its
/// gradient with respect to the logits.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                    const LabelMap& labels,
                                    std::optional<int> ignore_label = {});

/// Per-pixel argmax over channels; ties resolve to the lower class index.
template <typename T>
LabelMap argmax_channels(const Tensor<T>& logits);

namespace parallel {

int max_threads();
/// Sets the OpenMP team size used by the kernels (<= 0 restores the default).
void set_threads(int threads);

}  // namespace parallel

}  // namespace valvenet
