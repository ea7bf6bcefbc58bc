#pragma once

#include <cmath>
#include <random>

#include "valvenet/kernels.hpp"

namespace valvenet {

using Rng = std::mt19937_64;

/// Zero-mean Gaussian weights with variance 2 / fan_in, zero bias.
template <typename T>
ConvParams<T> he_normal_conv(Rng& rng, int out_channels, int in_channels, int kernel_h,
                             int kernel_w, int stride) {
  ConvParams<T> p;
  p.weights = Tensor<T>({out_channels, in_channels, kernel_h, kernel_w});
  p.bias.assign(out_channels, T(0));
  p.stride = stride;
  const double fan_in = static_cast<double>(in_channels) * kernel_h * kernel_w;
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (auto& w : p.weights.values()) w = static_cast<T>(dist(rng));
  return p;
}

}  // namespace valvenet
