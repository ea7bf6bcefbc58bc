#include "valvenet/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "valvenet/error.hpp"

namespace valvenet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* where = static_cast<std::string*>(png_get_error_ptr(png));
  throw FormatError("png '" + *where + "': " + msg);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

Raster read_png(const std::filesystem::path& path) {
  std::string where = path.string();
  File f(std::fopen(where.c_str(), "rb"));
  if (!f) throw FormatError("cannot open image '" + where + "'");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("'" + where + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &where, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int type = png_get_color_type(png, info);
  if (depth == 16) throw FormatError("'" + where + "': 16-bit PNGs are not supported");
  if (type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png), png_set_strip_alpha(png);
  png_read_update_info(png, info);

  Raster r(static_cast<int>(png_get_image_width(png, info)),
           static_cast<int>(png_get_image_height(png, info)),
           png_get_channels(png, info));
  if (r.channels != 1 && r.channels != 3) {
    throw FormatError("'" + where + "': unsupported channel layout");
  }
  std::vector<png_bytep> rows(r.height);
  for (int y = 0; y < r.height; ++y) {
    rows[y] = r.pixels.data() + static_cast<std::size_t>(y) * r.width * r.channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return r;
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw FormatError("write_png: only 1 or 3 channels are supported");
  }
  if (raster.width <= 0 || raster.height <= 0) throw FormatError("write_png: empty raster");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::string where = path.string();
  File f(std::fopen(where.c_str(), "wb"));
  if (!f) throw FormatError("cannot write image '" + where + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &where, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_IHDR(png, info, raster.width, raster.height, 8,
               raster.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(raster.height);
  for (int y = 0; y < raster.height; ++y) {
    rows[y] = const_cast<png_bytep>(raster.pixels.data()) +
              static_cast<std::size_t>(y) * raster.width * raster.channels;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
}

}  // namespace valvenet
