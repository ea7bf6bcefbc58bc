#include "valvenet/reference_kernels.hpp"

namespace valvenet::reference {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p) {
  p.validate();
  const Shape& in = input.shape();
  if (in.c != p.in_channels()) {
    throw ShapeError("reference conv2d_forward: input " + in.str() +
                     " incompatible with weights " + p.weights.shape().str());
  }
  const int kh = p.kernel_h(), kw = p.kernel_w();
  const int ph = kh / 2, pw = kw / 2;
  Tensor<T> out(conv_output_shape(in, p));
  const Shape& o = out.shape();
  for (int n = 0; n < o.n; ++n)
    for (int k = 0; k < o.c; ++k)
      for (int oy = 0; oy < o.h; ++oy)
        for (int ox = 0; ox < o.w; ++ox) {
          T acc = p.bias[k];
          for (int c = 0; c < in.c; ++c)
            for (int dy = 0; dy < kh; ++dy)
              for (int dx = 0; dx < kw; ++dx) {
                const int iy = oy * p.stride + dy - ph;
                const int ix = ox * p.stride + dx - pw;
                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                acc += p.weights(k, c, dy, dx) * input(n, c, iy, ix);
              }
          out(n, k, oy, ox) = acc;
        }
  return out;
}

template <typename T>
ConvBackward<T> conv2d_backward(const Tensor<T>& input, const ConvParams<T>& p,
                                const Tensor<T>& upstream) {
  p.validate();
  const Shape& in = input.shape();
  require_same_shape(upstream.shape(), conv_output_shape(in, p),
                     "reference conv2d_backward upstream");
  const int kh = p.kernel_h(), kw = p.kernel_w();
  const int ph = kh / 2, pw = kw / 2;
  const Shape& o = upstream.shape();

  ConvBackward<T> r;
  r.grad_input = Tensor<T>(in);
  r.grads.weights = Tensor<T>(p.weights.shape());
  r.grads.bias.assign(o.c, T(0));
  for (int n = 0; n < o.n; ++n)
    for (int k = 0; k < o.c; ++k)
      for (int oy = 0; oy < o.h; ++oy)
        for (int ox = 0; ox < o.w; ++ox) {
          const T g = upstream(n, k, oy, ox);
          r.grads.bias[k] += g;
          for (int c = 0; c < in.c; ++c)
            for (int dy = 0; dy < kh; ++dy)
              for (int dx = 0; dx < kw; ++dx) {
                const int iy = oy * p.stride + dy - ph;
                const int ix = ox * p.stride + dx - pw;
                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                r.grads.weights(k, c, dy, dx) += g * input(n, c, iy, ix);
                r.grad_input(n, c, iy, ix) += g * p.weights(k, c, dy, dx);
              }
        }
  return r;
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, int factor) {
  if (factor < 1) throw ShapeError("upsample factor must be >= 1");
  const Shape& s = input.shape();
  Tensor<T> out({s.n, s.c, s.h * factor, s.w * factor});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h * factor; ++y)
        for (int x = 0; x < s.w * factor; ++x)
          out(n, c, y, x) = input(n, c, y / factor, x / factor);
  return out;
}

template <typename T>
Tensor<T> upsample_nearest_backward(const Tensor<T>& upstream, int factor) {
  if (factor < 1) throw ShapeError("upsample factor must be >= 1");
  const Shape& s = upstream.shape();
  Tensor<T> out({s.n, s.c, s.h / factor, s.w / factor});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x)
          out(n, c, y / factor, x / factor) += upstream(n, c, y, x);
  return out;
}

template Tensor<float> conv2d_forward(const Tensor<float>&, const ConvParams<float>&);
template Tensor<double> conv2d_forward(const Tensor<double>&, const ConvParams<double>&);
template ConvBackward<float> conv2d_backward(const Tensor<float>&, const ConvParams<float>&,
                                             const Tensor<float>&);
template ConvBackward<double> conv2d_backward(const Tensor<double>&,
                                              const ConvParams<double>&,
                                              const Tensor<double>&);
template Tensor<float> upsample_nearest(const Tensor<float>&, int);
template Tensor<double> upsample_nearest(const Tensor<double>&, int);
template Tensor<float> upsample_nearest_backward(const Tensor<float>&, int);
template Tensor<double> upsample_nearest_backward(const Tensor<double>&, int);

}  // namespace valvenet::reference
