#pragma once

#include <array>
#include <utility>
#include <vector>

#include "raster.hpp"
#include "superpixel.hpp"

namespace colorforest {

// Fixed per-superpixel feature layout:
//   0-1    mean intensity (own, pooled neighbors)
//   2-3    mean 5x5 local standard deviation (own, pooled neighbors)
//   4-43   Gabor magnitudes, orientation-major: dim = 4 + 5*orientation + scale
//   44-171 dense SIFT
inline constexpr int kFeatureDim = 172;
inline constexpr int kGaborOrientations = 8;
inline constexpr int kGaborScales = 5;
inline constexpr int kGaborDim = kGaborOrientations * kGaborScales;
inline constexpr int kGaborOffset = 4;
inline constexpr int kSiftDim = 128;
inline constexpr int kSiftOffset = 44;

using FeatureVector = std::array<double, kFeatureDim>;

// Block multipliers fixed at training time so training-set Gabor and SIFT
// maxima are 1; inference features reuse the stored values.
struct FeatureScales {
  double gabor = 1.0;
  double sift = 1.0;
};

// Discrete complex Gabor tap grid, (2*radius+1)^2 row-major. Both parts are
// re-centered to zero mean after sampling, so constant inputs respond with
// exactly zero magnitude.
struct GaborKernel {
  int radius = 0;
  double wavelength = 0.0;
  double sigma = 0.0;
  std::vector<double> real;
  std::vector<double> imag;
};

// orientation k -> theta = k*pi/8; scale i -> wavelength pi*e^i, envelope
// sigma = 0.56*wavelength, radius ceil(3*sigma).
GaborKernel make_gabor_kernel(int orientation, int scale);

std::vector<std::pair<double, double>> intensity_feature(const Raster& gray,
                                                         const SuperpixelMap& sp);

// Population standard deviation over the 5x5 window around each pixel,
// border-clipped.
Raster local_stddev_map(const Raster& gray);

std::vector<std::pair<double, double>> stddev_feature(const Raster& gray,
                                                      const SuperpixelMap& sp);

// Per-pixel filter magnitudes for all 40 orientation/scale pairs, in feature
// order. Convolution uses replicate borders.
std::vector<Raster> gabor_magnitudes(const Raster& gray);

std::vector<std::array<double, kGaborDim>> gabor_feature(const Raster& gray,
                                                         const SuperpixelMap& sp);

// 16x16 patch, 4x4 cells, 8 orientation bins with bilinear orientation
// weighting; L2 normalization with 0.2 clipping and renormalization.
// Zero-gradient patches give the zero descriptor.
std::array<double, kSiftDim> sift_descriptor_at(const Raster& gray, int row, int col);

std::vector<std::array<double, kSiftDim>> dense_sift_feature(const Raster& gray,
                                                             const SuperpixelMap& sp);

std::vector<FeatureVector> assemble_features(const Raster& gray,
                                             const SuperpixelMap& sp,
                                             const FeatureScales& scales = {});

}  // namespace colorforest
