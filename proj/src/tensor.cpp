#include "valvenet/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace valvenet {

std::string Shape::str() const {
  std::ostringstream os;
  os << '[' << n << ", " << c << ", " << h << ", " << w << ']';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw ShapeError("negative tensor extent " + shape.str());
  }
  data_.assign(shape.numel(), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
  }
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T> Tensor<T>::slice_batch(int first, int count) const {
  if (first < 0 || count < 0 || first + count > shape_.n) {
    throw ShapeError("batch slice out of range for " + shape_.str());
  }
  Shape s = shape_;
  s.n = count;
  const std::size_t per = static_cast<std::size_t>(shape_.c) * shape_.h * shape_.w;
  std::vector<T> out(data_.begin() + first * per,
                     data_.begin() + (first + count) * per);
  return Tensor<T>(s, std::move(out));
}

template <typename T>
Tensor<T> stack_batch(std::span<const Tensor<T>> parts) {
  if (parts.empty()) return {};
  Shape s = parts.front().shape();
  int total = 0;
  for (const auto& p : parts) {
    Shape ps = p.shape();
    if (ps.c != s.c || ps.h != s.h || ps.w != s.w) {
      throw ShapeError("cannot stack " + ps.str() + " with " + s.str());
    }
    total += ps.n;
  }
  s.n = total;
  std::vector<T> out;
  out.reserve(s.numel());
  for (const auto& p : parts) {
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  return Tensor<T>(s, std::move(out));
}

LabelMap stack_labels(std::span<const LabelMap> parts) {
  if (parts.empty()) return {};
  LabelMap out;
  out.h = parts.front().h;
  out.w = parts.front().w;
  for (const auto& p : parts) {
    if (p.h != out.h || p.w != out.w) {
      throw ShapeError("cannot stack label planes of different extents");
    }
    out.n += p.n;
    out.data.insert(out.data.end(), p.data.begin(), p.data.end());
  }
  return out;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.str() +
                     " vs " + b.str());
  }
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> stack_batch(std::span<const Tensor<float>>);
template Tensor<double> stack_batch(std::span<const Tensor<double>>);

}  // namespace valvenet
