#include "raster.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace colorforest {

namespace {

constexpr double kSrgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// White point taken as the matrix row sums so that equal-channel grays land
// on the neutral axis to machine precision, instead of picking up the small
// chroma bias a separately rounded white point would introduce.
constexpr double kWhiteX = kSrgbToXyz[0][0] + kSrgbToXyz[0][1] + kSrgbToXyz[0][2];
constexpr double kWhiteY = kSrgbToXyz[1][0] + kSrgbToXyz[1][1] + kSrgbToXyz[1][2];
constexpr double kWhiteZ = kSrgbToXyz[2][0] + kSrgbToXyz[2][1] + kSrgbToXyz[2][2];

// BT.601 luma weights and chroma extrema.
constexpr double kWr = 0.299;
constexpr double kWg = 0.587;
constexpr double kWb = 0.114;
constexpr double kUmax = 0.436;
constexpr double kVmax = 0.615;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double srgb_to_linear(double c) {
  c = clamp01(c);
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  if (c <= 0.0031308) return 12.92 * c;
  return 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  constexpr double kCube = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
  constexpr double kSlope = (29.0 / 6.0) * (29.0 / 6.0) / 3.0;
  return t > kCube ? std::cbrt(t) : kSlope * t + 4.0 / 29.0;
}

double lab_f_inv(double u) {
  constexpr double kKnee = 6.0 / 29.0;
  constexpr double kSlope = (29.0 / 6.0) * (29.0 / 6.0) / 3.0;
  return u > kKnee ? u * u * u : (u - 4.0 / 29.0) / kSlope;
}

void require_space(const ColorTriple& c, ColorSpace space, const char* op) {
  if (c.space != space) {
    throw InvalidArgument(std::string(op) + ": color triple is in the wrong space");
  }
}

struct Mat3 {
  double m[3][3];
};

// Analytic 3x3 inverse; keeps the forward/backward pair consistent to double
// precision instead of relying on separately rounded published constants.
Mat3 invert(const double a[3][3]) {
  double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Mat3 r;
  r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return r;
}

const Mat3& xyz_to_srgb_matrix() {
  static const Mat3 inv = invert(kSrgbToXyz);
  return inv;
}

}  // namespace

Raster::Raster(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    throw InvalidArgument("raster: dimensions must be positive with 1 or 3 channels");
  }
  data_.assign(pixel_count() * channels, 0.0);
}

ColorTriple rgb_to_lab(const ColorTriple& c) {
  require_space(c, ColorSpace::kSrgb, "rgb_to_lab");
  const double r = srgb_to_linear(c.v0);
  const double g = srgb_to_linear(c.v1);
  const double b = srgb_to_linear(c.v2);
  const double x = kSrgbToXyz[0][0] * r + kSrgbToXyz[0][1] * g + kSrgbToXyz[0][2] * b;
  const double y = kSrgbToXyz[1][0] * r + kSrgbToXyz[1][1] * g + kSrgbToXyz[1][2] * b;
  const double z = kSrgbToXyz[2][0] * r + kSrgbToXyz[2][1] * g + kSrgbToXyz[2][2] * b;
  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);
  ColorTriple out;
  out.space = ColorSpace::kLab;
  out.v0 = std::clamp(116.0 * fy - 16.0, 0.0, 100.0);
  out.v1 = std::clamp(500.0 * (fx - fy), -128.0, 127.0);
  out.v2 = std::clamp(200.0 * (fy - fz), -128.0, 127.0);
  return out;
}

ColorTriple lab_to_rgb(const ColorTriple& c) {
  require_space(c, ColorSpace::kLab, "lab_to_rgb");
  const double l = std::clamp(c.v0, 0.0, 100.0);
  const double fy = (l + 16.0) / 116.0;
  const double fx = fy + c.v1 / 500.0;
  const double fz = fy - c.v2 / 200.0;
  const double x = kWhiteX * lab_f_inv(fx);
  const double y = kWhiteY * lab_f_inv(fy);
  const double z = kWhiteZ * lab_f_inv(fz);
  const Mat3& inv = xyz_to_srgb_matrix();
  const double r = inv.m[0][0] * x + inv.m[0][1] * y + inv.m[0][2] * z;
  const double g = inv.m[1][0] * x + inv.m[1][1] * y + inv.m[1][2] * z;
  const double b = inv.m[2][0] * x + inv.m[2][1] * y + inv.m[2][2] * z;
  ColorTriple out;
  out.space = ColorSpace::kSrgb;
  out.v0 = clamp01(linear_to_srgb(r));
  out.v1 = clamp01(linear_to_srgb(g));
  out.v2 = clamp01(linear_to_srgb(b));
  return out;
}

ColorTriple rgb_to_yuv(const ColorTriple& c) {
  require_space(c, ColorSpace::kSrgb, "rgb_to_yuv");
  const double r = clamp01(c.v0);
  const double g = clamp01(c.v1);
  const double b = clamp01(c.v2);
  // Written as r + wg*(g-r) + wb*(b-r) so equal channels give y == r to the
  // last bit, which in turn zeroes both chroma terms.
  const double y = r + kWg * (g - r) + kWb * (b - r);
  ColorTriple out;
  out.space = ColorSpace::kYuv;
  out.v0 = clamp01(y);
  out.v1 = std::clamp(kUmax * (b - y) / (1.0 - kWb), -kUmax, kUmax);
  out.v2 = std::clamp(kVmax * (r - y) / (1.0 - kWr), -kVmax, kVmax);
  return out;
}

ColorTriple yuv_to_rgb(const ColorTriple& c) {
  require_space(c, ColorSpace::kYuv, "yuv_to_rgb");
  const double y = c.v0;
  const double r = y + c.v2 * (1.0 - kWr) / kVmax;
  const double b = y + c.v1 * (1.0 - kWb) / kUmax;
  const double g = y - (kWr * (r - y) + kWb * (b - y)) / kWg;
  ColorTriple out;
  out.space = ColorSpace::kSrgb;
  out.v0 = clamp01(r);
  out.v1 = clamp01(g);
  out.v2 = clamp01(b);
  return out;
}

Raster to_grayscale(const Raster& img) {
  if (img.channels() != 3) {
    throw InvalidArgument("to_grayscale: expected a 3-channel raster");
  }
  Raster out(img.width(), img.height(), 1);
  auto r = img.plane(0);
  auto g = img.plane(1);
  auto b = img.plane(2);
  auto y = out.plane(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::clamp(r[i] + kWg * (g[i] - r[i]) + kWb * (b[i] - r[i]), 0.0, 1.0);
  }
  return out;
}

Raster gray_to_rgb(const Raster& gray) {
  if (gray.channels() != 1) {
    throw InvalidArgument("gray_to_rgb: expected a 1-channel raster");
  }
  Raster out(gray.width(), gray.height(), 3);
  auto y = gray.plane(0);
  for (int ch = 0; ch < 3; ++ch) {
    std::ranges::copy(y, out.plane(ch).begin());
  }
  return out;
}

}  // namespace colorforest
