#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "features.hpp"
#include "forest.hpp"
#include "propagate.hpp"
#include "quantize.hpp"
#include "raster.hpp"
#include "segment.hpp"
#include "superpixel.hpp"

namespace colorforest {

// Every tunable of the pipeline, serialized verbatim into the model so a
// loaded model colorizes exactly like the session that trained it.
struct PipelineConfig {
  int target_superpixel_size = 40;
  int clusters = 32;
  int trees = 1500;
  int dims_per_node = 14;
  int thresholds_per_dim = 13;
  double min_gain = 1e-6;
  int max_depth = 64;
  int min_node = 2;
  bool bootstrap = true;
  double spatial_bandwidth = 2.0;
  double range_bandwidth = 3.0;
  int min_region = 20;
  double cg_tolerance = 1e-6;
  std::uint64_t seed = 42;

  ForestConfig forest_config() const;
  void validate() const;
};

struct Model {
  PipelineConfig config;
  ChromaPalette palette;
  FeatureScales feature_scales;
  DecisionForest forest;
};

struct TrainStats {
  std::vector<int> superpixels_per_reference;
  int palette_size = 0;
};

struct EvalMetrics {
  double mean_ab_error = 0.0;
  double psnr = 0.0;
};

// Intermediate products of one colorize call, for debug dumps and tests.
struct ColorizeTrace {
  SuperpixelMap superpixels;
  std::vector<int> labels_pre_vote;
  std::vector<int> labels;
  Segmentation segmentation;
  ScribbleSet scribbles;
};

// references -> (palette, feature scales, forest). The cluster count drops to
// the number of distinct superpixel chroma values when fewer exist; having
// fewer superpixels than requested clusters is an error.
Model train_model(const std::vector<Raster>& references, const PipelineConfig& cfg,
                  int threads = 1, TrainStats* stats = nullptr);

// Structural sanity of a model (trained or deserialized).
void validate_model(const Model& model);

Raster colorize(const Raster& gray, const Model& model,
                const std::vector<std::pair<int, int>>& merges = {},
                ColorizeTrace* trace = nullptr);

// Frames are processed independently; element i equals colorize(frames[i]).
// Errors are rethrown with the frame index prefixed.
std::vector<Raster> colorize_sequence(const std::vector<Raster>& frames,
                                      const Model& model);

// mean_ab_error: mean Euclidean distance in CIELab (a, b) per pixel.
// psnr: over 8-bit RGB, capped at 99 dB.
EvalMetrics evaluate(const Raster& result, const Raster& truth);

}  // namespace colorforest
