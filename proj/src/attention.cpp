#include "valvenet/attention.hpp"

#include "valvenet/init.hpp"

#include <string>

namespace valvenet {

namespace {

void require_same_spatial(const Shape& a, const Shape& b, const char* what) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw ShapeError(std::string(what) + ": spatial mismatch between " + a.str() +
                     " and ROI " + b.str());
  }
}

}  // namespace

template <typename T>
RoiMap<T>::RoiMap(Tensor<T> mask) : mask_(std::move(mask)) {
  if (mask_.shape().c != 1) {
    throw ShapeError("ROI map must have one channel, got " + mask_.shape().str());
  }
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    const T v = mask_[i];
    if (v != T(0) && v != T(1)) {
      throw LabelError("ROI map values must be exactly 0 or 1; found " +
                       std::to_string(static_cast<double>(v)) + " at index " +
                       std::to_string(i));
    }
  }
}

template <typename T>
RoiMap<T> RoiMap<T>::from_labels(const LabelMap& labels) {
  Tensor<T> mask({labels.n, 1, labels.h, labels.w});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    mask[i] = labels.data[i] != 0 ? T(1) : T(0);
  }
  return RoiMap(std::move(mask));
}

template <typename T>
void ValveLayerParams<T>::validate() const {
  image.validate();
  valve.validate();
  const Shape& wi = image.weights.shape();
  const Shape& wv = valve.weights.shape();
  if (wv.c != 1) {
    throw ShapeError("valve filters must read a single ROI channel, got " + wv.str());
  }
  if (wi.n != wv.n || wi.h != wv.h || wi.w != wv.w || image.stride != valve.stride) {
    throw ShapeError("image filters " + wi.str() + " and valve filters " + wv.str() +
                     " must share count, extent and stride");
  }
}

template <typename T>
ValveActivations<T> valve_forward(const Tensor<T>& image, const RoiMap<T>& roi,
                                  const ValveLayerParams<T>& p) {
  p.validate();
  require_same_spatial(image.shape(), roi.shape(), "valve_forward");
  ValveActivations<T> a;
  a.feature = conv2d_forward(image, p.image);
  a.relevance = conv2d_forward(roi.tensor(), p.valve);
  a.normalized = elemwise_mul(a.feature, a.relevance);
  a.output = relu(a.normalized);
  return a;
}

template <typename T>
ValveGrads<T> valve_backward(const ValveActivations<T>& acts, const Tensor<T>& image,
                             const RoiMap<T>& roi, const ValveLayerParams<T>& p,
                             const Tensor<T>& upstream, bool want_image_grad) {
  require_same_shape(acts.output.shape(), upstream.shape(), "valve_backward upstream");
  const Tensor<T> d_normalized = relu_backward(acts.normalized, upstream);
  auto [d_feature, d_relevance] =
      elemwise_mul_backward(acts.feature, acts.relevance, d_normalized);
  ConvBackward<T> bi = conv2d_backward(image, p.image, d_feature, want_image_grad);
  ConvBackward<T> bv = conv2d_backward(roi.tensor(), p.valve, d_relevance, false);
  return {std::move(bi.grads), std::move(bv.grads), std::move(bi.grad_input)};
}

template <typename T>
ValveLayerParams<T> init_valve_layer(int filters, int image_channels, int kernel_h,
                                     int kernel_w, std::uint64_t seed) {
  if (filters <= 0 || image_channels <= 0 || kernel_h <= 0 || kernel_w <= 0) {
    throw ShapeError("valve layer extents must be positive");
  }
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw ShapeError("valve layer kernels must be odd");
  }
  ValveLayerParams<T> p;
  Rng rng(seed);
  p.image = he_normal_conv<T>(rng, filters, image_channels, kernel_h, kernel_w, 1);
  p.valve.weights = Tensor<T>({filters, 1, kernel_h, kernel_w});
  p.valve.bias.assign(filters, T(1));
  return p;
}

template <typename T>
Tensor<T> blackout_apply(const Tensor<T>& features, const RoiMap<T>& roi) {
  require_same_spatial(features.shape(), roi.shape(), "blackout_apply");
  const Shape& s = features.shape();
  Tensor<T> out(s);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    const T* m = roi.tensor().plane(n, 0);
    for (int c = 0; c < s.c; ++c) {
      const T* src = features.plane(n, c);
      T* dst = out.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * m[i];
    }
  }
  return out;
}

template <typename T>
Tensor<T> concat_roi_channel(const Tensor<T>& image, const RoiMap<T>& roi) {
  require_same_spatial(image.shape(), roi.shape(), "concat_roi_channel");
  return concat_channels(image, roi.tensor());
}

#define VALVENET_INSTANTIATE(T)                                                     \
  template class RoiMap<T>;                                                         \
  template struct ValveLayerParams<T>;                                              \
  template ValveActivations<T> valve_forward(const Tensor<T>&, const RoiMap<T>&,    \
                                             const ValveLayerParams<T>&);           \
  template ValveGrads<T> valve_backward(const ValveActivations<T>&, const Tensor<T>&, \
                                        const RoiMap<T>&, const ValveLayerParams<T>&, \
                                        const Tensor<T>&, bool);                    \
  template ValveLayerParams<T> init_valve_layer(int, int, int, int, std::uint64_t); \
  template Tensor<T> blackout_apply(const Tensor<T>&, const RoiMap<T>&);            \
  template Tensor<T> concat_roi_channel(const Tensor<T>&, const RoiMap<T>&);

VALVENET_INSTANTIATE(float)
VALVENET_INSTANTIATE(double)

#undef VALVENET_INSTANTIATE

}  // namespace valvenet
