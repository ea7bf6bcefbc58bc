#pragma once

#include <cstdint>

#include "valvenet/kernels.hpp"
#include "valvenet/tensor.hpp"

namespace valvenet {

/// Binary region-of-interest mask, shape [n, 1, h, w], values exactly 0 or 1.
/// Validated on construction; soft masks are rejected.
template <typename T>
class RoiMap {
 public:
  explicit RoiMap(Tensor<T> mask);
  /// Any nonzero label becomes 1.
  static RoiMap from_labels(const LabelMap& labels);

  const Tensor<T>& tensor() const { return mask_; }
  const Shape& shape() const { return mask_.shape(); }

 private:
  Tensor<T> mask_;
};

/// First-layer parameters of a valve layer: image filters convolved with the
/// image and, per image filter, one valve filter convolved with the ROI map.
template <typename T>
struct ValveLayerParams {
  ConvParams<T> image;
  ConvParams<T> valve;

  int filters() const { return image.out_channels(); }
  /// Throws ShapeError unless both convs share filter count, kernel extents
  /// and stride, and the valve conv reads exactly one channel.
  void validate() const;

  template <typename U>
  ValveLayerParams<U> cast() const {
    return {image.template cast<U>(), valve.template cast<U>()};
  }
};

template <typename T>
struct ValveActivations {
  Tensor<T> feature;     // conv(image)
  Tensor<T> relevance;   // conv(roi)
  Tensor<T> normalized;  // feature * relevance
  Tensor<T> output;      // relu(normalized)
};

template <typename T>
struct ValveGrads {
  ConvGrads<T> image;
  ConvGrads<T> valve;
  Tensor<T> grad_image;  // empty unless requested
};

template <typename T>
ValveActivations<T> valve_forward(const Tensor<T>& image, const RoiMap<T>& roi,
                                  const ValveLayerParams<T>& p);

/// Backpropagates through relu, the product and both convolutions. The ROI is
/// data, so no gradient is produced for it.
template <typename T>
ValveGrads<T> valve_backward(const ValveActivations<T>& acts, const Tensor<T>& image,
                             const RoiMap<T>& roi, const ValveLayerParams<T>& p,
                             const Tensor<T>& upstream, bool want_image_grad = true);

/// He-normal image filters, zero image bias; valve weights 0 and valve bias 1
/// so the relevance map starts at exactly 1 everywhere.
template <typename T>
ValveLayerParams<T> init_valve_layer(int filters, int image_channels, int kernel_h,
                                     int kernel_w, std::uint64_t seed);

/// Zeroes every channel outside the ROI: out[n,c,y,x] = f[n,c,y,x] * roi[n,0,y,x].
/// Also serves as its own backward pass.
template <typename T>
Tensor<T> blackout_apply(const Tensor<T>& features, const RoiMap<T>& roi);

/// Appends the ROI as the last input channel.
template <typename T>
Tensor<T> concat_roi_channel(const Tensor<T>& image, const RoiMap<T>& roi);

}  // namespace valvenet
