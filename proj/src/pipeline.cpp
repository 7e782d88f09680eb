#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace colorforest {

namespace {

constexpr std::uint64_t kQuantizeSeedTag = 1;

void require_color(const Raster& img, const char* who) {
  if (img.channels() != 3 || img.width() <= 0 || img.height() <= 0) {
    throw InvalidArgument(std::string(who) + ": expected a non-empty 3-channel raster");
  }
}

// Mean CIELab (a, b) over each superpixel of a color reference.
std::vector<std::pair<double, double>> superpixel_chroma(const Raster& ref,
                                                         const SuperpixelMap& sp) {
  std::vector<std::pair<double, double>> out(sp.count);
  for (int id = 0; id < sp.count; ++id) {
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (int px : sp.members[id]) {
      const ColorTriple lab = rgb_to_lab(
          {ColorSpace::kSrgb, ref.plane(0)[px], ref.plane(1)[px], ref.plane(2)[px]});
      sum_a += lab.v1;
      sum_b += lab.v2;
    }
    const double inv = 1.0 / static_cast<double>(sp.members[id].size());
    out[id] = {sum_a * inv, sum_b * inv};
  }
  return out;
}

}  // namespace

ForestConfig PipelineConfig::forest_config() const {
  ForestConfig fc;
  fc.trees = trees;
  fc.dims_per_node = dims_per_node;
  fc.thresholds_per_dim = thresholds_per_dim;
  fc.min_gain = min_gain;
  fc.max_depth = max_depth;
  fc.min_node = min_node;
  fc.bootstrap = bootstrap;
  fc.seed = seed;
  return fc;
}

void PipelineConfig::validate() const {
  if (target_superpixel_size < 1) {
    throw InvalidArgument("config: target_superpixel_size must be >= 1");
  }
  if (clusters < 1) throw InvalidArgument("config: clusters must be >= 1");
  if (!(spatial_bandwidth > 0.0) || !(range_bandwidth > 0.0)) {
    throw InvalidArgument("config: mean-shift bandwidths must be positive");
  }
  if (min_region < 0) throw InvalidArgument("config: min_region must be >= 0");
  if (!(cg_tolerance > 0.0)) {
    throw InvalidArgument("config: cg_tolerance must be positive");
  }
  forest_config().validate();
}

Model train_model(const std::vector<Raster>& references, const PipelineConfig& cfg,
                  int threads, TrainStats* stats) {
  cfg.validate();
  if (references.empty()) {
    throw InvalidArgument("train_model: at least one reference image is required");
  }

  std::vector<FeatureVector> features;
  std::vector<std::pair<double, double>> chroma;
  std::vector<int> per_reference;
  for (const Raster& ref : references) {
    require_color(ref, "train_model");
    const Raster gray = to_grayscale(ref);
    const SuperpixelMap sp = extract_superpixels(gray, cfg.target_superpixel_size);
    per_reference.push_back(sp.count);
    const std::vector<FeatureVector> fv = assemble_features(gray, sp);
    features.insert(features.end(), fv.begin(), fv.end());
    const auto ab = superpixel_chroma(ref, sp);
    chroma.insert(chroma.end(), ab.begin(), ab.end());
  }

  if (static_cast<int>(chroma.size()) < cfg.clusters) {
    throw PipelineError("train_model: " + std::to_string(chroma.size()) +
                        " superpixels cannot support " + std::to_string(cfg.clusters) +
                        " chroma clusters; lower the cluster count or use larger references");
  }

  // A reference set with fewer distinct chroma values than requested clusters
  // collapses to that many (e.g. a single flat-color reference gives one).
  std::vector<std::pair<double, double>> distinct(chroma);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const int effective_k = std::min<int>(cfg.clusters, static_cast<int>(distinct.size()));

  QuantizeResult quant =
      quantize_chroma(chroma, effective_k, derive_seed(cfg.seed, kQuantizeSeedTag));

  double gabor_max = 0.0;
  double sift_max = 0.0;
  for (const FeatureVector& fv : features) {
    for (int d = kGaborOffset; d < kSiftOffset; ++d) gabor_max = std::max(gabor_max, fv[d]);
    for (int d = kSiftOffset; d < kFeatureDim; ++d) sift_max = std::max(sift_max, fv[d]);
  }
  const FeatureScales scales{gabor_max > 0.0 ? 1.0 / gabor_max : 1.0,
                             sift_max > 0.0 ? 1.0 / sift_max : 1.0};
  for (FeatureVector& fv : features) {
    for (int d = kGaborOffset; d < kSiftOffset; ++d) fv[d] *= scales.gabor;
    for (int d = kSiftOffset; d < kFeatureDim; ++d) fv[d] *= scales.sift;
  }

  TrainingSet set;
  set.features = std::move(features);
  set.labels = quant.labels;

  Model model;
  model.config = cfg;
  model.palette = std::move(quant.palette);
  model.feature_scales = scales;
  model.forest = train_forest(set, model.palette.size(), cfg.forest_config(), threads);

  if (stats != nullptr) {
    stats->superpixels_per_reference = std::move(per_reference);
    stats->palette_size = model.palette.size();
  }
  return model;
}

void validate_model(const Model& model) {
  model.config.validate();
  if (model.palette.size() < 1) {
    throw InvalidArgument("model: palette is empty");
  }
  if (model.forest.trees.empty()) {
    throw InvalidArgument("model: forest has no trees");
  }
  if (model.forest.classes != model.palette.size()) {
    throw InvalidArgument("model: forest label count " +
                          std::to_string(model.forest.classes) +
                          " does not match palette size " +
                          std::to_string(model.palette.size()));
  }
  if (!(model.feature_scales.gabor > 0.0) || !(model.feature_scales.sift > 0.0)) {
    throw InvalidArgument("model: feature scales must be positive");
  }
}

Raster colorize(const Raster& gray, const Model& model,
                const std::vector<std::pair<int, int>>& merges,
                ColorizeTrace* trace) {
  if (gray.channels() != 1 || gray.width() <= 0 || gray.height() <= 0) {
    throw InvalidArgument("colorize: expected a non-empty single-channel raster");
  }
  validate_model(model);
  const PipelineConfig& cfg = model.config;

  SuperpixelMap sp = extract_superpixels(gray, cfg.target_superpixel_size);
  const std::vector<FeatureVector> features =
      assemble_features(gray, sp, model.feature_scales);

  std::vector<int> labels(sp.count);
  for (int id = 0; id < sp.count; ++id) {
    labels[id] = argmax_label(predict(model.forest, features[id]));
  }

  Segmentation seg = meanshift_segment(gray, cfg.spatial_bandwidth,
                                       cfg.range_bandwidth, cfg.min_region);
  if (!merges.empty()) seg = apply_merge_map(seg, merges);
  std::vector<int> voted = vote_refine(labels, sp, seg);

  ScribbleSet scribbles = place_scribbles(sp, voted, model.palette, gray);
  const WeightStencil stencil = compute_weights(gray);
  const auto [u, v] = propagate_chroma(stencil, scribbles, cfg.cg_tolerance);
  Raster out = compose_output(gray, u, v);

  if (trace != nullptr) {
    trace->labels_pre_vote = std::move(labels);
    trace->labels = std::move(voted);
    trace->superpixels = std::move(sp);
    trace->segmentation = std::move(seg);
    trace->scribbles = std::move(scribbles);
  }
  return out;
}

std::vector<Raster> colorize_sequence(const std::vector<Raster>& frames,
                                      const Model& model) {
  std::vector<Raster> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "frame " + std::to_string(i) + ": ";
    try {
      out.push_back(colorize(frames[i], model));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + e.what());
    } catch (const IoError& e) {
      throw IoError(where + e.what());
    } catch (const PipelineError& e) {
      throw PipelineError(where + e.what());
    }
  }
  return out;
}

EvalMetrics evaluate(const Raster& result, const Raster& truth) {
  require_color(result, "evaluate");
  require_color(truth, "evaluate");
  if (!result.same_shape(truth)) {
    throw InvalidArgument("evaluate: image shapes differ");
  }
  const std::size_t n = result.pixel_count();

  double ab_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ColorTriple lr = rgb_to_lab({ColorSpace::kSrgb, result.plane(0)[i],
                                       result.plane(1)[i], result.plane(2)[i]});
    const ColorTriple lt = rgb_to_lab({ColorSpace::kSrgb, truth.plane(0)[i],
                                       truth.plane(1)[i], truth.plane(2)[i]});
    ab_sum += std::hypot(lr.v1 - lt.v1, lr.v2 - lt.v2);
  }

  double mse_sum = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    const std::span<const double> pr = result.plane(ch);
    const std::span<const double> pt = truth.plane(ch);
    for (std::size_t i = 0; i < n; ++i) {
      const long a = std::lround(std::clamp(pr[i], 0.0, 1.0) * 255.0);
      const long b = std::lround(std::clamp(pt[i], 0.0, 1.0) * 255.0);
      const double d = static_cast<double>(a - b);
      mse_sum += d * d;
    }
  }
  const double mse = mse_sum / (3.0 * static_cast<double>(n));

  EvalMetrics m;
  m.mean_ab_error = ab_sum / static_cast<double>(n);
  m.psnr = mse == 0.0 ? 99.0
                      : std::min(99.0, 10.0 * std::log10(255.0 * 255.0 / mse));
  return m;
}

}  // namespace colorforest
