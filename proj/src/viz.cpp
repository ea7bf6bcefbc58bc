#include "valvenet/viz.hpp"

#include <algorithm>
#include <cmath>

#include "valvenet/error.hpp"
#include "valvenet/labels.hpp"

namespace valvenet {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v * 255.0 + 0.5), 0.0, 255.0));
}

}  // namespace

Palette Palette::for_level(int level) {
  static const std::array<Rgb8, 15> kColors{{
      {0, 0, 0},       {0, 160, 255}, {255, 200, 0},   {255, 90, 40},  {200, 80, 255},
      {0, 220, 120},   {255, 255, 255}, {140, 90, 40}, {255, 120, 200}, {230, 230, 150},
      {120, 120, 120}, {90, 40, 140}, {0, 120, 120},   {180, 255, 60}, {170, 220, 255},
  }};
  Palette p;
  const int n = class_count(level);
  p.colors.assign(kColors.begin(), kColors.begin() + n);
  return p;
}

Raster render_signed_map(std::span<const double> plane, int width, int height) {
  if (plane.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("render_signed_map: plane has " + std::to_string(plane.size()) +
                     " values for " + std::to_string(width) + "x" + std::to_string(height));
  }
  double m = 0;
  for (double v : plane) m = std::max(m, std::abs(v));
  Raster r(width, height, 3);
  if (m == 0) return r;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const double v = plane[i];
    if (v > 0) r.pixels[3 * i + 1] = to_byte(v / m);
    else if (v < 0) r.pixels[3 * i] = to_byte(-v / m);
  }
  return r;
}

Raster render_signed_map(const TensorF& t, int n, int c) {
  const float* p = t.plane(n, c);
  std::vector<double> values(p, p + t.shape().plane());
  return render_signed_map(values, t.shape().w, t.shape().h);
}

Raster image_to_raster(const TensorF& image, int index) {
  const auto& s = image.shape();
  if (s.c != 3) throw ShapeError("image_to_raster: expected 3 channels, got " + s.str());
  Raster r(s.w, s.h, 3);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = to_byte(image(index, c, y, x));
  return r;
}

Raster render_overlay(const TensorF& image, const LabelMap& labels, const Palette& palette,
                      double alpha, int index) {
  const auto& s = image.shape();
  if (s.c != 3 || labels.h != s.h || labels.w != s.w) {
    throw ShapeError("render_overlay: image " + s.str() + " and labels " +
                     std::to_string(labels.h) + "x" + std::to_string(labels.w) + " differ");
  }
  Raster r(s.w, s.h, 3);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) {
      const int cls = labels.at(index, y, x);
      if (cls >= static_cast<int>(palette.colors.size())) {
        throw Error("render_overlay: no palette entry for class " + std::to_string(cls));
      }
      for (int c = 0; c < 3; ++c) {
        const double v = image(index, c, y, x);
        r.at(x, y, c) =
            cls == 0 ? to_byte(v) : to_byte((1 - alpha) * v + alpha * palette.colors[cls][c] / 255.0);
      }
    }
  return r;
}

Raster labels_to_raster(const LabelMap& labels, const Palette& palette, int index) {
  Raster r(labels.w, labels.h, 3);
  for (int y = 0; y < labels.h; ++y)
    for (int x = 0; x < labels.w; ++x) {
      const int cls = labels.at(index, y, x);
      if (cls >= static_cast<int>(palette.colors.size())) {
        throw Error("labels_to_raster: no palette entry for class " + std::to_string(cls));
      }
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = palette.colors[cls][c];
    }
  return r;
}

Raster magnify(const Raster& r, int factor) {
  if (factor < 1) throw ShapeError("magnify: factor must be positive");
  Raster out(r.width * factor, r.height * factor, r.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < r.channels; ++c) out.at(x, y, c) = r.at(x / factor, y / factor, c);
  return out;
}

TensorF raster_to_image(const Raster& raster) {
  if (raster.channels != 3) throw FormatError("expected an RGB image");
  TensorF t({1, 3, raster.height, raster.width});
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      for (int c = 0; c < 3; ++c) t(0, c, y, x) = raster.at(x, y, c) / 255.0f;
    }
  }
  return t;
}

}  // namespace valvenet
