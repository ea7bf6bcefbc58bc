#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace valvenet {

/// 8-bit raster, interleaved channels, row-major.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  friend bool operator==(const Raster&, const Raster&) = default;
};

/// Reads 8-bit gray, gray+alpha, RGB, RGBA or palette PNGs. Alpha is dropped;
/// palette images expand to RGB. 16-bit input is rejected with FormatError.
Raster read_png(const std::filesystem::path& path);

/// Writes a gray (1 channel) or RGB (3 channel) 8-bit PNG. Output bytes
/// depend only on the raster.
void write_png(const std::filesystem::path& path, const Raster& raster);

}  // namespace valvenet
