#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "errors.hpp"
#include "png_io.hpp"
#include "raster.hpp"
#include "rng.hpp"
#include "support.hpp"

using namespace colorforest;

namespace {

ColorTriple srgb(double r, double g, double b) {
  return ColorTriple{ColorSpace::kSrgb, r, g, b};
}

}  // namespace

TEST_CASE("raster construction and access") {
  Raster img(4, 3, 3);
  CHECK(img.width() == 4);
  CHECK(img.height() == 3);
  CHECK(img.channels() == 3);
  CHECK(img.samples().size() == 4 * 3 * 3);
  img.at(2, 1, 3) = 0.75;
  CHECK(img.at(2, 1, 3) == 0.75);
  CHECK(img.plane(2)[1 * 4 + 3] == 0.75);
  CHECK(img.at(0, 0, 0) == 0.0);

  Raster other(4, 3, 3);
  CHECK(img.same_shape(other));
  CHECK_FALSE(img.same_shape(Raster(3, 4, 3)));
  CHECK_FALSE(img.same_shape(Raster(4, 3, 1)));

  CHECK_THROWS_AS(Raster(0, 3, 1), InvalidArgument);
  CHECK_THROWS_AS(Raster(3, -1, 1), InvalidArgument);
  CHECK_THROWS_AS(Raster(3, 3, 2), InvalidArgument);
}

TEST_CASE("luma weights") {
  Raster img(3, 1, 3);
  img.at(0, 0, 0) = 1.0;  // red pixel
  img.at(1, 0, 1) = 1.0;  // green pixel
  img.at(2, 0, 2) = 1.0;  // blue pixel
  Raster gray = to_grayscale(img);
  CHECK(gray.at(0, 0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  CHECK(gray.at(0, 0, 1) == doctest::Approx(0.587).epsilon(1e-12));
  CHECK(gray.at(0, 0, 2) == doctest::Approx(0.114).epsilon(1e-12));
  CHECK_THROWS_AS(to_grayscale(gray), InvalidArgument);
}

TEST_CASE("gray to rgb and back is exact") {
  Raster gray = testsupport::noise_raster(9, 7, 11);
  Raster rgb = gray_to_rgb(gray);
  Raster back = to_grayscale(rgb);
  for (std::size_t i = 0; i < gray.samples().size(); ++i) {
    CHECK(back.samples()[i] == gray.samples()[i]);
  }
  CHECK_THROWS_AS(gray_to_rgb(rgb), InvalidArgument);
}

TEST_CASE("lab endpoints and known values") {
  ColorTriple white = rgb_to_lab(srgb(1, 1, 1));
  CHECK(white.space == ColorSpace::kLab);
  CHECK(white.v0 == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(std::abs(white.v1) < 1e-9);
  CHECK(std::abs(white.v2) < 1e-9);

  ColorTriple black = rgb_to_lab(srgb(0, 0, 0));
  CHECK(black.v0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  ColorTriple mid = rgb_to_lab(srgb(0.5, 0.5, 0.5));
  CHECK(mid.v0 == doctest::Approx(53.389).epsilon(1e-3));

  ColorTriple red = rgb_to_lab(srgb(1, 0, 0));
  CHECK(red.v1 > 40.0);   // strongly positive a
  CHECK(red.v2 > 20.0);   // yellow-ish b
  ColorTriple blue = rgb_to_lab(srgb(0, 0, 1));
  CHECK(blue.v2 < -60.0); // strongly negative b
}

TEST_CASE("grays stay neutral in lab") {
  SplitMix64 rng(404);
  for (int i = 0; i < 64; ++i) {
    const double v = i < 2 ? static_cast<double>(i) : rng.uniform();
    ColorTriple lab = rgb_to_lab(srgb(v, v, v));
    CHECK(std::abs(lab.v1) < 1e-9);
    CHECK(std::abs(lab.v2) < 1e-9);
  }
}

TEST_CASE("lab round trip over the gamut") {
  double worst = 0.0;
  for (int r = 0; r <= 8; ++r) {
    for (int g = 0; g <= 8; ++g) {
      for (int b = 0; b <= 8; ++b) {
        ColorTriple in = srgb(r / 8.0, g / 8.0, b / 8.0);
        ColorTriple back = lab_to_rgb(rgb_to_lab(in));
        worst = std::max({worst, std::abs(back.v0 - in.v0),
                          std::abs(back.v1 - in.v1), std::abs(back.v2 - in.v2)});
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("lab inputs clamp instead of extrapolating") {
  ColorTriple over = rgb_to_lab(srgb(1.4, -0.2, 0.5));
  ColorTriple edge = rgb_to_lab(srgb(1.0, 0.0, 0.5));
  CHECK(over.v0 == edge.v0);
  CHECK(over.v1 == edge.v1);
  CHECK(over.v2 == edge.v2);

  ColorTriple out = lab_to_rgb(ColorTriple{ColorSpace::kLab, 70.0, 120.0, -120.0});
  CHECK(out.v0 >= 0.0);
  CHECK(out.v0 <= 1.0);
  CHECK(out.v1 >= 0.0);
  CHECK(out.v1 <= 1.0);
  CHECK(out.v2 >= 0.0);
  CHECK(out.v2 <= 1.0);
}

TEST_CASE("yuv known values") {
  ColorTriple red = rgb_to_yuv(srgb(1, 0, 0));
  CHECK(red.v0 == doctest::Approx(0.299).epsilon(1e-9));
  CHECK(red.v1 == doctest::Approx(-0.436 * 0.299 / 0.886).epsilon(1e-9));
  CHECK(red.v2 == doctest::Approx(0.615).epsilon(1e-9));

  ColorTriple blue = rgb_to_yuv(srgb(0, 0, 1));
  CHECK(blue.v0 == doctest::Approx(0.114).epsilon(1e-9));
  CHECK(blue.v1 == doctest::Approx(0.436).epsilon(1e-9));
  CHECK(blue.v2 == doctest::Approx(-0.615 * 0.114 / 0.701).epsilon(1e-9));
}

TEST_CASE("yuv neutral axis is exact both ways") {
  SplitMix64 rng(405);
  for (int i = 0; i < 64; ++i) {
    const double v = i < 2 ? static_cast<double>(i) : rng.uniform();
    ColorTriple yuv = rgb_to_yuv(srgb(v, v, v));
    CHECK(yuv.v0 == v);
    CHECK(yuv.v1 == 0.0);
    CHECK(yuv.v2 == 0.0);
    ColorTriple back = yuv_to_rgb(ColorTriple{ColorSpace::kYuv, v, 0.0, 0.0});
    CHECK(back.v0 == v);
    CHECK(back.v1 == v);
    CHECK(back.v2 == v);
  }
}

TEST_CASE("yuv round trip") {
  SplitMix64 rng(406);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    ColorTriple in = srgb(rng.uniform(), rng.uniform(), rng.uniform());
    ColorTriple back = yuv_to_rgb(rgb_to_yuv(in));
    worst = std::max({worst, std::abs(back.v0 - in.v0), std::abs(back.v1 - in.v1),
                      std::abs(back.v2 - in.v2)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("yuv out of gamut output clamps to the unit cube") {
  ColorTriple out = yuv_to_rgb(ColorTriple{ColorSpace::kYuv, 0.9, 0.43, -0.6});
  for (double v : {out.v0, out.v1, out.v2}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("conversions reject the wrong source space") {
  ColorTriple lab{ColorSpace::kLab, 50, 0, 0};
  ColorTriple yuv{ColorSpace::kYuv, 0.5, 0, 0};
  ColorTriple rgb = srgb(0.5, 0.5, 0.5);
  CHECK_THROWS_AS(rgb_to_lab(lab), InvalidArgument);
  CHECK_THROWS_AS(rgb_to_yuv(yuv), InvalidArgument);
  CHECK_THROWS_AS(lab_to_rgb(rgb), InvalidArgument);
  CHECK_THROWS_AS(yuv_to_rgb(lab), InvalidArgument);
}

TEST_CASE("png round trip preserves 8-bit values") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "colorforest_raster_tests";
  fs::create_directories(dir);

  Raster img(5, 4, 3);
  SplitMix64 rng(77);
  for (auto& v : img.samples()) v = static_cast<double>(rng.below(256)) / 255.0;
  const fs::path rgb_path = dir / "rt_rgb.png";
  save_png(img, rgb_path.string());
  Raster back = load_png(rgb_path.string());
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.samples().size(); ++i) {
    CHECK(back.samples()[i] == img.samples()[i]);
  }

  Raster gray(6, 2, 1);
  for (auto& v : gray.samples()) v = static_cast<double>(rng.below(256)) / 255.0;
  const fs::path gray_path = dir / "rt_gray.png";
  save_png(gray, gray_path.string());
  Raster gback = load_png(gray_path.string());
  REQUIRE(gback.same_shape(gray));
  for (std::size_t i = 0; i < gray.samples().size(); ++i) {
    CHECK(gback.samples()[i] == gray.samples()[i]);
  }

  CHECK_THROWS_AS(load_png((dir / "missing.png").string()), IoError);
}

TEST_CASE("label png writes 16-bit grayscale") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "colorforest_raster_tests";
  fs::create_directories(dir);
  const fs::path path = dir / "labels.png";

  std::vector<int> labels = {0, 1, 2, 3, 4, 5};
  save_label_png16(labels, 3, 2, path.string());

  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  unsigned char header[26] = {0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  const unsigned char magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  for (int i = 0; i < 8; ++i) CHECK(header[i] == magic[i]);
  // IHDR: width 3, height 2, bit depth 16, color type 0 (grayscale).
  CHECK(header[19] == 3);
  CHECK(header[23] == 2);
  CHECK(header[24] == 16);
  CHECK(header[25] == 0);
}
