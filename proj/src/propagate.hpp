#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "quantize.hpp"
#include "raster.hpp"
#include "superpixel.hpp"

namespace colorforest {

// Hard chroma constraint at one pixel.
struct Scribble {
  int pixel = 0;  // row-major index
  double u = 0.0;
  double v = 0.0;
};

struct ScribbleSet {
  std::vector<Scribble> entries;  // unique pixel indices
};

// Per-pixel 8-neighborhoods (border-clipped, CSR layout) with luminance
// similarity weights normalized to sum 1 per pixel.
struct WeightStencil {
  int width = 0;
  int height = 0;
  std::vector<std::size_t> offsets;  // pixel_count + 1
  std::vector<int> neighbors;
  std::vector<double> weights;
  std::vector<double> sigma;  // per-pixel 3x3 luminance std-dev, floored

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

// exp(-(yp-yq)^2 / (2 sigma_p^2)), the unnormalized neighbor affinity.
double luminance_affinity(double yp, double yq, double sigma_p);

WeightStencil compute_weights(const Raster& gray);

// One scribble per superpixel, at its centroid pixel. The chroma is the
// palette (a, b) of the superpixel's label combined with the centroid pixel's
// own lightness, taken through Lab -> sRGB (clamped) -> YUV.
ScribbleSet place_scribbles(const SuperpixelMap& sp, const std::vector<int>& labels,
                            const ChromaPalette& palette, const Raster& gray);

// Minimizes sum_p (C(p) - sum_q w_pq C(q))^2 with hard equality at scribbles,
// independently for U and V, via conjugate gradient on the reduced normal
// equations. Stops at relative residual < tolerance or max_iterations; on
// non-convergence prints a warning and keeps the best iterate seen.
std::pair<Raster, Raster> propagate_chroma(const WeightStencil& stencil,
                                           const ScribbleSet& scribbles,
                                           double tolerance = 1e-6,
                                           int max_iterations = 10000);

// Per-pixel YUV -> sRGB using the input gray as luminance.
Raster compose_output(const Raster& gray, const Raster& u, const Raster& v);

}  // namespace colorforest
