#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace colorforest {

// Planar real-valued image: 1 (gray) or 3 channels, each a row-major
// width*height array. Gray samples and sRGB components live in [0, 1].
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  double& at(int channel, int row, int col) {
    return data_[plane_offset(channel) + static_cast<std::size_t>(row) * width_ + col];
  }
  double at(int channel, int row, int col) const {
    return data_[plane_offset(channel) + static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<double> plane(int channel) {
    return {data_.data() + plane_offset(channel), pixel_count()};
  }
  std::span<const double> plane(int channel) const {
    return {data_.data() + plane_offset(channel), pixel_count()};
  }

  // All planes, channel-major.
  std::span<const double> samples() const { return data_; }
  std::span<double> samples() { return data_; }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

 private:
  std::size_t plane_offset(int channel) const {
    return static_cast<std::size_t>(channel) * pixel_count();
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

enum class ColorSpace { kSrgb, kLab, kYuv };

struct ColorTriple {
  ColorSpace space = ColorSpace::kSrgb;
  double v0 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
};

// sRGB (D65, standard piecewise transfer) <-> CIELab. Inputs are clamped to
// the declared range of their space; so are outputs, which in particular maps
// out-of-gamut Lab onto the sRGB cube.
ColorTriple rgb_to_lab(const ColorTriple& c);
ColorTriple lab_to_rgb(const ColorTriple& c);

// sRGB <-> BT.601 YUV. Equal-channel grays map to U = V = 0 exactly.
ColorTriple rgb_to_yuv(const ColorTriple& c);
ColorTriple yuv_to_rgb(const ColorTriple& c);

// Per-pixel BT.601 luminance of a 3-channel raster.
Raster to_grayscale(const Raster& img);

// Replicates a 1-channel raster into 3 equal channels.
Raster gray_to_rgb(const Raster& gray);

}  // namespace colorforest
