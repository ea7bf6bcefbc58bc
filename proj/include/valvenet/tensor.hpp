#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "valvenet/error.hpp"

namespace valvenet {

/// Extents of a rank-4 tensor in [batch, channel, height, width] order.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major tensor, width fastest. Owns its storage.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  std::size_t offset(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) *
               shape_.w +
           x;
  }
  T& operator()(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  T operator()(int n, int c, int y, int x) const {
    return data_[offset(n, c, y, x)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  T* plane(int n, int c) { return data_.data() + offset(n, c, 0, 0); }
  const T* plane(int n, int c) const { return data_.data() + offset(n, c, 0, 0); }

  void fill(T value);

  /// Copies samples [first, first + count) into a new tensor.
  Tensor slice_batch(int first, int count) const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

/// Stacks equally-shaped tensors along the batch axis.
template <typename T>
Tensor<T> stack_batch(std::span<const Tensor<T>> parts);

/// Per-pixel integer class plane, layout [n, h, w].
struct LabelMap {
  int n = 0;
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> data;

  LabelMap() = default;
  LabelMap(int n_, int h_, int w_, std::uint8_t fill = 0)
      : n(n_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t offset(int b, int y, int x) const {
    return (static_cast<std::size_t>(b) * h + y) * w + x;
  }
  std::uint8_t& at(int b, int y, int x) { return data[offset(b, y, x)]; }
  std::uint8_t at(int b, int y, int x) const { return data[offset(b, y, x)]; }
  bool same_extent(const LabelMap& o) const {
    return n == o.n && h == o.h && w == o.w;
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

LabelMap stack_labels(std::span<const LabelMap> parts);

// Throws ShapeError mentioning both shapes when they differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

}  // namespace valvenet
