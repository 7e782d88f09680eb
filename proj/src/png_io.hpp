#pragma once

#include <string>
#include <vector>

#include "raster.hpp"

namespace colorforest {

// 8-bit PNG in, samples mapped to [0, 1] by v/255. Grayscale files load as
// 1 channel, color files as 3 (alpha dropped, 16-bit depth reduced to 8).
Raster load_png(const std::string& path);

// 8-bit PNG out, samples mapped by round(v*255) with clamping.
void save_png(const Raster& img, const std::string& path);

// 16-bit grayscale PNG of an id map; used for segment/superpixel debug dumps.
void save_label_png16(const std::vector<int>& labels, int width, int height,
                      const std::string& path);

}  // namespace colorforest
