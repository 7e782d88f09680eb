#pragma once

#include <cstddef>
#include <istream>
#include <utility>
#include <vector>

#include "raster.hpp"
#include "superpixel.hpp"

namespace colorforest {

// Exact partition of a raster into segments; ids dense 0..count-1.
struct Segmentation {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int> seg_labels;    // row-major pixel ids
  std::vector<std::size_t> sizes; // per id
};

// Mean-shift mode seeking in (x, y, intensity) with flat kernels; intensity
// works on a 0..255 scale so range_bw is expressed in gray levels. Pixels
// whose converged modes differ by at most range_bw are grouped 4-connected;
// regions below min_region pixels are absorbed by their most similar
// adjacent region.
Segmentation meanshift_segment(const Raster& gray, double spatial_bw = 2.0,
                               double range_bw = 3.0, int min_region = 20);

// Union-find merge of the listed segment pairs, then id re-densification.
// Throws naming the offending pair if an id is out of range.
Segmentation apply_merge_map(const Segmentation& seg,
                             const std::vector<std::pair<int, int>>& merges);

// Text merge maps: one `<id> <id>` pair per line, `#` starts a comment,
// blank lines ignored. Throws with the line number on malformed input.
std::vector<std::pair<int, int>> parse_merge_map(std::istream& in);

// Segment-level label voting. Each superpixel belongs to the segment holding
// the majority of its pixels (ties to the lower segment id). In segments with
// at least 3 superpixels, the plurality label overwrites all members; a tied
// plurality leaves the segment unchanged, as do smaller segments.
std::vector<int> vote_refine(const std::vector<int>& labels,
                             const SuperpixelMap& sp, const Segmentation& seg);

}  // namespace colorforest
