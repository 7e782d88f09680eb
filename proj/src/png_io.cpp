#include "png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "errors.hpp"

namespace colorforest {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

unsigned char to_byte(double v) {
  double scaled = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<unsigned char>(scaled);
}

}  // namespace

Raster load_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> row_pointers;
  std::vector<unsigned char> bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  // Normalize everything to 8-bit gray or RGB.
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported channel layout after decode");
  }

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  bytes.assign(stride * height, 0);
  row_pointers.resize(height);
  for (int r = 0; r < height; ++r) row_pointers[r] = bytes.data() + stride * r;
  png_read_image(png, row_pointers.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Raster out(width, height, channels);
  for (int ch = 0; ch < channels; ++ch) {
    auto plane = out.plane(ch);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        plane[static_cast<std::size_t>(r) * width + c] =
            bytes[stride * r + static_cast<std::size_t>(c) * channels + ch] / 255.0;
      }
    }
  }
  return out;
}

void save_png(const Raster& img, const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path);
  }
  png_init_io(png, file.get());

  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  std::vector<unsigned char> row(stride);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        row[static_cast<std::size_t>(c) * channels + ch] = to_byte(img.at(ch, r, c));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_label_png16(const std::vector<int>& labels, int width, int height,
                      const std::string& path) {
  if (width < 1 || height < 1 ||
      labels.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("label dump: labels do not match the stated shape");
  }
  for (int v : labels) {
    if (v < 0 || v > 65535) throw PipelineError("label dump: id out of 16-bit range");
  }

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 2);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int v = labels[static_cast<std::size_t>(r) * width + c];
      row[2 * static_cast<std::size_t>(c)] = static_cast<unsigned char>(v >> 8);
      row[2 * static_cast<std::size_t>(c) + 1] = static_cast<unsigned char>(v & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace colorforest
