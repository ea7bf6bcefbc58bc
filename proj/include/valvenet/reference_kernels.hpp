#pragma once

// Serial direct-loop convolution and resampling. Slow by construction: these
// are the oracles the OpenMP kernels are tested and benchmarked against.

#include "valvenet/kernels.hpp"

namespace valvenet::reference {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p);

template <typename T>
ConvBackward<T> conv2d_backward(const Tensor<T>& input, const ConvParams<T>& p,
                                const Tensor<T>& upstream);

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, int factor);

template <typename T>
Tensor<T> upsample_nearest_backward(const Tensor<T>& upstream, int factor);

}  // namespace valvenet::reference
