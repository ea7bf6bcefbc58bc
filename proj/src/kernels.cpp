#include "valvenet/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace valvenet {

namespace {

// Below this many elements the elementwise kernels stay single-threaded.
constexpr std::size_t kParallelThreshold = 1 << 15;

// Output columns processed per block in the GEMM loops (fits L1 for 4 rows).

struct ConvGeometry {
  int channels, in_h, in_w;
  int kh, kw, pad_h, pad_w, stride;
  int out_h, out_w;

  int rows() const { return channels * kh * kw; }
  int cols() const { return out_h * out_w; }
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1; }
};

template <typename T>
ConvGeometry geometry_for(const Shape& in, const ConvParams<T>& p) {
  ConvGeometry g{};
  g.channels = in.c;
  g.in_h = in.h;
  g.in_w = in.w;
  g.kh = p.kernel_h();
  g.kw = p.kernel_w();
  g.pad_h = g.kh / 2;
  g.pad_w = g.kw / 2;
  g.stride = p.stride;
  g.out_h = conv_out_extent(in.h, p.stride);
  g.out_w = conv_out_extent(in.w, p.stride);
  return g;
}

// col[j][q] with j = (c * kh + dy) * kw + dx and q = oy * out_w + ox.
template <typename T>
void im2col(const T* in, const ConvGeometry& g, T* col) {
  const int rows = g.rows();
#pragma omp parallel for if (static_cast<std::size_t>(rows) * g.cols() > kParallelThreshold)
  for (int j = 0; j < rows; ++j) {
    const int dx = j % g.kw;
    const int dy = (j / g.kw) % g.kh;
    const int c = j / (g.kw * g.kh);
    const T* src = in + static_cast<std::size_t>(c) * g.in_h * g.in_w;
    T* dst = col + static_cast<std::size_t>(j) * g.cols();
    for (int oy = 0; oy < g.out_h; ++oy) {
      const int iy = oy * g.stride + dy - g.pad_h;
      T* row = dst + static_cast<std::size_t>(oy) * g.out_w;
      if (iy < 0 || iy >= g.in_h) {
        std::fill(row, row + g.out_w, T(0));
        continue;
      }
      const T* srow = src + static_cast<std::size_t>(iy) * g.in_w;
      for (int ox = 0; ox < g.out_w; ++ox) {
        const int ix = ox * g.stride + dx - g.pad_w;
        row[ox] = (ix >= 0 && ix < g.in_w) ? srow[ix] : T(0);
      }
    }
  }
}

// Scatter-adds col gradients into the input gradient. Each thread owns whole
// input channels, and within a channel the accumulation order is fixed.
template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* grad_in) {
#pragma omp parallel for if (static_cast<std::size_t>(g.rows()) * g.cols() > kParallelThreshold)
  for (int c = 0; c < g.channels; ++c) {
    T* dst = grad_in + static_cast<std::size_t>(c) * g.in_h * g.in_w;
    for (int dy = 0; dy < g.kh; ++dy) {
      for (int dx = 0; dx < g.kw; ++dx) {
        const int j = (c * g.kh + dy) * g.kw + dx;
        const T* src = col + static_cast<std::size_t>(j) * g.cols();
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride + dy - g.pad_h;
          if (iy < 0 || iy >= g.in_h) continue;
          T* drow = dst + static_cast<std::size_t>(iy) * g.in_w;
          const T* srow = src + static_cast<std::size_t>(oy) * g.out_w;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride + dx - g.pad_w;
            if (ix >= 0 && ix < g.in_w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

// Register tile of the GEMM below: MR rows by kTileCols columns.
constexpr int kTileRows = 8;
constexpr int kTileCols = 32;

template <typename T, int MR>
void gemm_tile(int inner, int cols, const T* a, const T* b, const T* init, T* out, int r0,
               int q0) {
  T acc[MR][kTileCols];
  for (int i = 0; i < MR; ++i) {
    const T v = init ? init[r0 + i] : T(0);
    for (int q = 0; q < kTileCols; ++q) acc[i][q] = v;
  }
  const T* arow = a + static_cast<std::size_t>(r0) * inner;
  for (int j = 0; j < inner; ++j) {
    const T* __restrict bj = b + static_cast<std::size_t>(j) * cols + q0;
    for (int i = 0; i < MR; ++i) {
      const T w = arow[static_cast<std::size_t>(i) * inner + j];
#pragma omp simd
      for (int q = 0; q < kTileCols; ++q) acc[i][q] += w * bj[q];
    }
  }
  for (int i = 0; i < MR; ++i) {
    T* o = out + static_cast<std::size_t>(r0 + i) * cols + q0;
    for (int q = 0; q < kTileCols; ++q) o[q] = acc[i][q];
  }
}

template <typename T>
void gemm_edge(int inner, int cols, const T* a, const T* b, const T* init, T* out, int r0,
               int nr, int q0, int nq) {
  for (int i = 0; i < nr; ++i) {
    T* o = out + static_cast<std::size_t>(r0 + i) * cols + q0;
    const T v = init ? init[r0 + i] : T(0);
    std::fill(o, o + nq, v);
    const T* ai = a + static_cast<std::size_t>(r0 + i) * inner;
    for (int j = 0; j < inner; ++j) {
      const T w = ai[j];
      const T* __restrict bj = b + static_cast<std::size_t>(j) * cols + q0;
#pragma omp simd
      for (int q = 0; q < nq; ++q) o[q] += w * bj[q];
    }
  }
}

// out[r][q] = init[r] + sum_j a[r][j] * b[j][q]. Every element is summed in
// the same order (init, then j ascending) whatever the tiling and thread
// count, so results are bit-identical across thread counts.
template <typename T>
void gemm_rows(int rows, int inner, int cols, const T* a, const T* b,
               const T* init, T* out) {
  const int row_blocks = (rows + kTileRows - 1) / kTileRows;
  const int col_blocks = (cols + kTileCols - 1) / kTileCols;
#pragma omp parallel for collapse(2) schedule(static) if (static_cast<std::size_t>(rows) * inner * cols > kParallelThreshold)
  for (int rb = 0; rb < row_blocks; ++rb) {
    for (int cb = 0; cb < col_blocks; ++cb) {
      const int r0 = rb * kTileRows;
      const int nr = std::min(kTileRows, rows - r0);
      const int q0 = cb * kTileCols;
      const int nq = std::min(kTileCols, cols - q0);
      if (nq < kTileCols) {
        gemm_edge(inner, cols, a, b, init, out, r0, nr, q0, nq);
        continue;
      }
      switch (nr) {
        case 8: gemm_tile<T, 8>(inner, cols, a, b, init, out, r0, q0); break;
        case 7: gemm_tile<T, 7>(inner, cols, a, b, init, out, r0, q0); break;
        case 6: gemm_tile<T, 6>(inner, cols, a, b, init, out, r0, q0); break;
        case 5: gemm_tile<T, 5>(inner, cols, a, b, init, out, r0, q0); break;
        case 4: gemm_tile<T, 4>(inner, cols, a, b, init, out, r0, q0); break;
        case 3: gemm_tile<T, 3>(inner, cols, a, b, init, out, r0, q0); break;
        case 2: gemm_tile<T, 2>(inner, cols, a, b, init, out, r0, q0); break;
        default: gemm_tile<T, 1>(inner, cols, a, b, init, out, r0, q0); break;
      }
    }
  }
}

// out[r][c] = sum_q a[r][q] * b[c][q] for row-major a [rows, inner] and
// b [cols, inner]. Each output keeps one vector of lane partial sums that is
// reduced in a fixed order, so the result does not depend on threading.
// Edge tiles clamp to the last valid row/column and discard the duplicates.
template <typename T>
void gemm_nt(int rows, int cols, int inner, const T* a, const T* b, T* out) {
  constexpr int kLanes = 64 / sizeof(T);
  constexpr int kR = 4, kC = 4;
  const int row_blocks = (rows + kR - 1) / kR;
  const int col_blocks = (cols + kC - 1) / kC;
#pragma omp parallel for collapse(2) schedule(static) if (static_cast<std::size_t>(rows) * cols * inner > kParallelThreshold)
  for (int rb = 0; rb < row_blocks; ++rb) {
    for (int cb = 0; cb < col_blocks; ++cb) {
      const T* ar[kR];
      const T* bc[kC];
      for (int i = 0; i < kR; ++i) {
        ar[i] = a + static_cast<std::size_t>(std::min(rb * kR + i, rows - 1)) * inner;
      }
      for (int j = 0; j < kC; ++j) {
        bc[j] = b + static_cast<std::size_t>(std::min(cb * kC + j, cols - 1)) * inner;
      }
      T acc[kR][kC][kLanes] = {};
      int q = 0;
      for (; q + kLanes <= inner; q += kLanes) {
        for (int i = 0; i < kR; ++i)
          for (int j = 0; j < kC; ++j) {
#pragma omp simd
            for (int l = 0; l < kLanes; ++l) acc[i][j][l] += ar[i][q + l] * bc[j][q + l];
          }
      }
      for (int i = 0; i < kR; ++i) {
        const int r = rb * kR + i;
        if (r >= rows) break;
        for (int j = 0; j < kC; ++j) {
          const int c = cb * kC + j;
          if (c >= cols) break;
          T sum = T(0);
          for (int l = 0; l < kLanes; ++l) sum += acc[i][j][l];
          for (int t = q; t < inner; ++t) sum += ar[i][t] * bc[j][t];
          out[static_cast<std::size_t>(r) * cols + c] = sum;
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void ConvParams<T>::validate() const {
  const Shape& s = weights.shape();
  if (s.n <= 0 || s.c <= 0 || s.h <= 0 || s.w <= 0) {
    throw ShapeError("conv weights must have positive extents, got " + s.str());
  }
  if (s.h % 2 == 0 || s.w % 2 == 0) {
    throw ShapeError("conv kernel extents must be odd, got " + s.str());
  }
  if (bias.size() != static_cast<std::size_t>(s.n)) {
    throw ShapeError("conv bias length " + std::to_string(bias.size()) +
                     " does not match " + std::to_string(s.n) + " filters");
  }
  if (stride < 1) throw ShapeError("conv stride must be positive");
}

template <typename T>
Shape conv_output_shape(const Shape& input, const ConvParams<T>& p) {
  return {input.n, p.out_channels(), conv_out_extent(input.h, p.stride),
          conv_out_extent(input.w, p.stride)};
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p) {
  p.validate();
  const Shape& in = input.shape();
  if (in.c != p.in_channels()) {
    throw ShapeError("conv2d_forward: input " + in.str() +
                     " incompatible with weights " + p.weights.shape().str());
  }
  const ConvGeometry g = geometry_for(in, p);
  Tensor<T> out(conv_output_shape(in, p));
  std::vector<T> col;
  if (!g.pointwise()) col.resize(static_cast<std::size_t>(g.rows()) * g.cols());
  for (int n = 0; n < in.n; ++n) {
    const T* src = input.plane(n, 0);
    if (!g.pointwise()) {
      im2col(src, g, col.data());
      src = col.data();
    }
    gemm_rows(p.out_channels(), g.rows(), g.cols(), p.weights.data(), src,
              p.bias.data(), out.plane(n, 0));
  }
  return out;
}

template <typename T>
ConvBackward<T> conv2d_backward(const Tensor<T>& input, const ConvParams<T>& p,
                                const Tensor<T>& upstream, bool want_input_grad) {
  p.validate();
  const Shape& in = input.shape();
  if (in.c != p.in_channels()) {
    throw ShapeError("conv2d_backward: input " + in.str() +
                     " incompatible with weights " + p.weights.shape().str());
  }
  require_same_shape(upstream.shape(), conv_output_shape(in, p),
                     "conv2d_backward upstream");

  const ConvGeometry g = geometry_for(in, p);
  const int k_out = p.out_channels();
  const int rows = g.rows();
  const int cols = g.cols();

  ConvBackward<T> r;
  r.grads.weights = Tensor<T>(p.weights.shape());
  r.grads.bias.assign(k_out, T(0));
  if (want_input_grad) r.grad_input = Tensor<T>(in);

  // Transposed weights [rows, k_out] for the input-gradient GEMM.
  std::vector<T> wt(static_cast<std::size_t>(rows) * k_out);
  for (int k = 0; k < k_out; ++k) {
    for (int j = 0; j < rows; ++j) {
      wt[static_cast<std::size_t>(j) * k_out + k] =
          p.weights[static_cast<std::size_t>(k) * rows + j];
    }
  }

  std::vector<T> col;
  std::vector<T> grad_col;
  if (!g.pointwise()) col.resize(static_cast<std::size_t>(rows) * cols);
  if (want_input_grad && !g.pointwise()) grad_col.resize(col.size());
  std::vector<T> gw_n(static_cast<std::size_t>(k_out) * rows);

  T* gw = r.grads.weights.data();
  for (int n = 0; n < in.n; ++n) {
    const T* src = input.plane(n, 0);
    if (!g.pointwise()) {
      im2col(src, g, col.data());
      src = col.data();
    }
    const T* dy = upstream.plane(n, 0);

    for (int k = 0; k < k_out; ++k) {
      const T* dyk = dy + static_cast<std::size_t>(k) * cols;
      T acc = T(0);
      for (int q = 0; q < cols; ++q) acc += dyk[q];
      r.grads.bias[k] += acc;
    }

    gemm_nt(k_out, rows, cols, dy, src, gw_n.data());
    for (std::size_t i = 0; i < gw_n.size(); ++i) gw[i] += gw_n[i];

    if (want_input_grad) {
      if (g.pointwise()) {
        // grad_input plane for sample n is exactly the column gradient.
        std::vector<T> tmp(static_cast<std::size_t>(rows) * cols);
        gemm_rows(rows, k_out, cols, wt.data(), dy, static_cast<const T*>(nullptr),
                  tmp.data());
        std::copy(tmp.begin(), tmp.end(), r.grad_input.plane(n, 0));
      } else {
        gemm_rows(rows, k_out, cols, wt.data(), dy, static_cast<const T*>(nullptr),
                  grad_col.data());
        col2im_add(grad_col.data(), g, r.grad_input.plane(n, 0));
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  const std::size_t n = input.size();
  const T* x = input.data();
  T* y = out.data();
#pragma omp parallel for simd if (n > kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& upstream) {
  require_same_shape(input.shape(), upstream.shape(), "relu_backward");
  Tensor<T> out(input.shape());
  const std::size_t n = input.size();
  const T* x = input.data();
  const T* g = upstream.data();
  T* y = out.data();
#pragma omp parallel for simd if (n > kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? g[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> elemwise_mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "elemwise_mul");
  Tensor<T> out(a.shape());
  const std::size_t n = a.size();
  const T* x = a.data();
  const T* z = b.data();
  T* y = out.data();
#pragma omp parallel for simd if (n > kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * z[i];
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> elemwise_mul_backward(const Tensor<T>& a,
                                                      const Tensor<T>& b,
                                                      const Tensor<T>& upstream) {
  require_same_shape(a.shape(), b.shape(), "elemwise_mul_backward");
  require_same_shape(a.shape(), upstream.shape(), "elemwise_mul_backward upstream");
  return {elemwise_mul(upstream, b), elemwise_mul(upstream, a)};
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, int factor) {
  if (factor < 1) {
    throw ShapeError("upsample factor must be >= 1, got " + std::to_string(factor));
  }
  const Shape& s = input.shape();
  Tensor<T> out({s.n, s.c, s.h * factor, s.w * factor});
  const int planes = s.n * s.c;
#pragma omp parallel for if (out.size() > kParallelThreshold)
  for (int pl = 0; pl < planes; ++pl) {
    const T* src = input.data() + static_cast<std::size_t>(pl) * s.h * s.w;
    T* dst = out.data() + static_cast<std::size_t>(pl) * s.h * s.w * factor * factor;
    const int ow = s.w * factor;
    for (int oy = 0; oy < s.h * factor; ++oy) {
      const T* srow = src + static_cast<std::size_t>(oy / factor) * s.w;
      T* drow = dst + static_cast<std::size_t>(oy) * ow;
      for (int ox = 0; ox < ow; ++ox) drow[ox] = srow[ox / factor];
    }
  }
  return out;
}

template <typename T>
Tensor<T> upsample_nearest_backward(const Tensor<T>& upstream, int factor) {
  if (factor < 1) {
    throw ShapeError("upsample factor must be >= 1, got " + std::to_string(factor));
  }
  const Shape& s = upstream.shape();
  if (s.h % factor != 0 || s.w % factor != 0) {
    throw ShapeError("upsample backward: " + s.str() + " not divisible by factor " +
                     std::to_string(factor));
  }
  Tensor<T> out({s.n, s.c, s.h / factor, s.w / factor});
  const Shape& o = out.shape();
  const int planes = s.n * s.c;
#pragma omp parallel for if (upstream.size() > kParallelThreshold)
  for (int pl = 0; pl < planes; ++pl) {
    const T* src = upstream.data() + static_cast<std::size_t>(pl) * s.h * s.w;
    T* dst = out.data() + static_cast<std::size_t>(pl) * o.h * o.w;
    for (int y = 0; y < s.h; ++y) {
      const T* srow = src + static_cast<std::size_t>(y) * s.w;
      T* drow = dst + static_cast<std::size_t>(y / factor) * o.w;
      for (int x = 0; x < s.w; ++x) drow[x / factor] += srow[x];
    }
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("concat_channels: shape mismatch " + sa.str() + " vs " + sb.str());
  }
  Tensor<T> out({sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::size_t pa = static_cast<std::size_t>(sa.c) * sa.h * sa.w;
  const std::size_t pb = static_cast<std::size_t>(sb.c) * sb.h * sb.w;
  for (int n = 0; n < sa.n; ++n) {
    T* dst = out.plane(n, 0);
    std::copy_n(a.data() + n * pa, pa, dst);
    std::copy_n(b.data() + n * pb, pb, dst + pa);
  }
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& upstream,
                                               int first_channels) {
  const Shape& s = upstream.shape();
  if (first_channels < 0 || first_channels > s.c) {
    throw ShapeError("split_channels: cannot take " + std::to_string(first_channels) +
                     " channels from " + s.str());
  }
  Tensor<T> a({s.n, first_channels, s.h, s.w});
  Tensor<T> b({s.n, s.c - first_channels, s.h, s.w});
  const std::size_t pa = static_cast<std::size_t>(first_channels) * s.h * s.w;
  const std::size_t pb = static_cast<std::size_t>(s.c - first_channels) * s.h * s.w;
  for (int n = 0; n < s.n; ++n) {
    const T* src = upstream.plane(n, 0);
    std::copy_n(src, pa, a.data() + n * pa);
    std::copy_n(src + pa, pb, b.data() + n * pb);
  }
  return {std::move(a), std::move(b)};
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, const LabelMap& labels,
                                    std::optional<int> ignore_label) {
  const Shape& s = logits.shape();
  if (labels.n != s.n || labels.h != s.h || labels.w != s.w) {
    throw ShapeError("softmax_cross_entropy: logits " + s.str() + " vs labels [" +
                     std::to_string(labels.n) + ", " + std::to_string(labels.h) +
                     ", " + std::to_string(labels.w) + "]");
  }
  const std::size_t plane = s.plane();
  std::size_t counted = 0;
  for (int n = 0; n < s.n; ++n) {
    for (std::size_t i = 0; i < plane; ++i) {
      const int label = labels.data[n * plane + i];
      if (ignore_label && label == *ignore_label) continue;
      if (label >= s.c) {
        const int y = static_cast<int>(i / s.w);
        const int x = static_cast<int>(i % s.w);
        throw LabelError("label " + std::to_string(label) + " at pixel (n=" +
                         std::to_string(n) + ", y=" + std::to_string(y) +
                         ", x=" + std::to_string(x) + ") outside [0, " +
                         std::to_string(s.c) + ")");
      }
      ++counted;
    }
  }

  LossResult<T> r;
  r.grad = Tensor<T>(s);
  if (counted == 0) return r;
  const T scale = T(1) / static_cast<T>(counted);
  double total = 0.0;
  std::vector<T> probs(s.c);
  for (int n = 0; n < s.n; ++n) {
    const T* base = logits.plane(n, 0);
    T* gbase = r.grad.plane(n, 0);
    for (std::size_t i = 0; i < plane; ++i) {
      const int label = labels.data[n * plane + i];
      if (ignore_label && label == *ignore_label) continue;
      T mx = base[i];
      for (int c = 1; c < s.c; ++c) mx = std::max(mx, base[c * plane + i]);
      T sum = T(0);
      for (int c = 0; c < s.c; ++c) {
        probs[c] = std::exp(base[c * plane + i] - mx);
        sum += probs[c];
      }
      const T log_sum = std::log(sum);
      total += static_cast<double>(log_sum - (base[label * plane + i] - mx));
      for (int c = 0; c < s.c; ++c) {
        const T pc = probs[c] / sum;
        gbase[c * plane + i] = (pc - (c == label ? T(1) : T(0))) * scale;
      }
    }
  }
  r.loss = static_cast<T>(total / static_cast<double>(counted));
  return r;
}

template <typename T>
LabelMap argmax_channels(const Tensor<T>& logits) {
  const Shape& s = logits.shape();
  LabelMap out(s.n, s.h, s.w);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    const T* base = logits.plane(n, 0);
    for (std::size_t i = 0; i < plane; ++i) {
      int best = 0;
      T best_v = base[i];
      for (int c = 1; c < s.c; ++c) {
        const T v = base[c * plane + i];
        if (v > best_v) {
          best_v = v;
          best = c;
        }
      }
      out.data[n * plane + i] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

namespace parallel {

namespace {
int g_default_threads = -1;
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int threads) {
  if (g_default_threads < 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : g_default_threads);
}

}  // namespace parallel

#define VALVENET_INSTANTIATE(T)                                                   \
  template struct ConvParams<T>;                                                  \
  template Shape conv_output_shape(const Shape&, const ConvParams<T>&);           \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const ConvParams<T>&);      \
  template ConvBackward<T> conv2d_backward(const Tensor<T>&, const ConvParams<T>&, \
                                           const Tensor<T>&, bool);               \
  template Tensor<T> relu(const Tensor<T>&);                                      \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);           \
  template Tensor<T> elemwise_mul(const Tensor<T>&, const Tensor<T>&);            \
  template std::pair<Tensor<T>, Tensor<T>> elemwise_mul_backward(                 \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> upsample_nearest(const Tensor<T>&, int);                     \
  template Tensor<T> upsample_nearest_backward(const Tensor<T>&, int);            \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);         \
  template std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>&, int); \
  template LossResult<T> softmax_cross_entropy(const Tensor<T>&, const LabelMap&, \
                                               std::optional<int>);               \
  template LabelMap argmax_channels(const Tensor<T>&);

VALVENET_INSTANTIATE(float)
VALVENET_INSTANTIATE(double)

#undef VALVENET_INSTANTIATE

}  // namespace valvenet
