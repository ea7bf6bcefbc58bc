#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "valvenet/png_io.hpp"
#include "valvenet/tensor.hpp"

namespace valvenet {

using Rgb8 = std::array<std::uint8_t, 3>;

/// Class colors of one annotation level; class 0 (background) is black.
struct Palette {
  std::vector<Rgb8> colors;

  static Palette for_level(int level);
};

/// Positive values green, negative red, intensity |v| / max|v| (rounded
/// half-up). An all-zero plane renders black.
Raster render_signed_map(std::span<const double> plane, int width, int height);
Raster render_signed_map(const TensorF& t, int n, int c);

/// (1 - alpha) * image + alpha * color of the label; background pixels keep
/// the image. Throws Error for a label without palette entry.
Raster render_overlay(const TensorF& image, const LabelMap& labels, const Palette& palette,
                      double alpha, int index = 0);

Raster image_to_raster(const TensorF& image, int index = 0);
/// RGB raster as a [1, 3, h, w] image in [0, 1]. Throws FormatError otherwise.
TensorF raster_to_image(const Raster& raster);
/// Class colors of one label plane.
Raster labels_to_raster(const LabelMap& labels, const Palette& palette, int index = 0);

/// Nearest-neighbor magnification, for small maps.
Raster magnify(const Raster& r, int factor);

}  // namespace valvenet
