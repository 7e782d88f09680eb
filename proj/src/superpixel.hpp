#pragma once

#include <utility>
#include <vector>

#include "raster.hpp"

namespace colorforest {

// Exact partition of a raster into compact 4-connected regions. ids are dense
// 0..count-1; adjacency is symmetric and irreflexive (4-connected borders).
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int> labels;                          // row-major pixel ids
  std::vector<std::vector<int>> members;            // per id, ascending pixel index
  std::vector<std::pair<double, double>> centroids; // per id, (row, col)
  std::vector<std::vector<int>> neighbors;          // per id, sorted adjacent ids
};

// Builds members/centroids/adjacency from a dense label image. Throws if ids
// are not dense 0..max.
SuperpixelMap superpixel_map_from_labels(int width, int height,
                                         std::vector<int> labels);

// Iterative local k-means in (intensity, row, col), grid-seeded at spacing
// sqrt(target_size), 10 iterations, compactness weight 0.1 on grid-normalized
// coordinates. A post-pass reattaches disconnected fragments so every output
// superpixel is 4-connected. Deterministic: no randomness is involved.
SuperpixelMap extract_superpixels(const Raster& gray, int target_size);

// Member pixel nearest to the real-valued centroid (ties to the smallest
// row-major index). Throws on an out-of-range id.
int centroid_pixel(const SuperpixelMap& sp, int id);

}  // namespace colorforest
