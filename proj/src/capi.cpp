#include "colorforest/colorforest.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model_io.hpp"
#include "pipeline.hpp"
#include "png_io.hpp"
#include "raster.hpp"

using namespace colorforest;

struct cf_raster {
  Raster img;
};

struct cf_config {
  PipelineConfig cfg;
  int threads = 1;
};

struct cf_model {
  Model model;
};

namespace {

thread_local std::string t_last_error;

cf_status fail(cf_status code, const char* message) {
  t_last_error = message;
  return code;
}

// Runs `body` and folds every exception into a status + cf_last_error().
template <typename Fn>
cf_status guarded(Fn&& body) {
  try {
    body();
    t_last_error.clear();
    return CF_OK;
  } catch (const InvalidArgument& e) {
    return fail(CF_ERR_INVALID, e.what());
  } catch (const IoError& e) {
    return fail(CF_ERR_IO, e.what());
  } catch (const PipelineError& e) {
    return fail(CF_ERR_PIPELINE, e.what());
  } catch (const std::exception& e) {
    return fail(CF_ERR_PIPELINE, e.what());
  } catch (...) {
    return fail(CF_ERR_PIPELINE, "unknown error");
  }
}

void write_scribble_dump(const ScribbleSet& scribbles, int width,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.precision(17);
  for (const Scribble& s : scribbles.entries) {
    out << s.pixel / width << ' ' << s.pixel % width << ' ' << s.u << ' ' << s.v
        << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing scribbles to '" + path + "'");
}

std::vector<std::pair<int, int>> read_merge_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open merge map '" + path + "'");
  return parse_merge_map(in);
}

}  // namespace

extern "C" {

const char* cf_version(void) { return "1.0.0"; }

const char* cf_last_error(void) { return t_last_error.c_str(); }

cf_status cf_raster_load_png(const char* path, cf_raster** out) {
  if (path == nullptr || out == nullptr) {
    return fail(CF_ERR_INVALID, "cf_raster_load_png: NULL argument");
  }
  *out = nullptr;
  return guarded([&] { *out = new cf_raster{load_png(path)}; });
}

cf_status cf_raster_save_png(const cf_raster* raster, const char* path) {
  if (raster == nullptr || path == nullptr) {
    return fail(CF_ERR_INVALID, "cf_raster_save_png: NULL argument");
  }
  return guarded([&] { save_png(raster->img, path); });
}

cf_status cf_raster_create(int width, int height, int channels,
                           const double* samples, cf_raster** out) {
  if (out == nullptr) return fail(CF_ERR_INVALID, "cf_raster_create: NULL output");
  *out = nullptr;
  return guarded([&] {
    Raster img(width, height, channels);
    if (samples != nullptr) {
      std::memcpy(img.samples().data(), samples,
                  img.samples().size() * sizeof(double));
    }
    *out = new cf_raster{std::move(img)};
  });
}

void cf_raster_free(cf_raster* raster) { delete raster; }

int cf_raster_width(const cf_raster* raster) {
  return raster == nullptr ? 0 : raster->img.width();
}

int cf_raster_height(const cf_raster* raster) {
  return raster == nullptr ? 0 : raster->img.height();
}

int cf_raster_channels(const cf_raster* raster) {
  return raster == nullptr ? 0 : raster->img.channels();
}

const double* cf_raster_samples(const cf_raster* raster) {
  return raster == nullptr ? nullptr : raster->img.samples().data();
}

cf_status cf_raster_to_gray(const cf_raster* raster, cf_raster** out) {
  if (raster == nullptr || out == nullptr) {
    return fail(CF_ERR_INVALID, "cf_raster_to_gray: NULL argument");
  }
  *out = nullptr;
  return guarded([&] {
    *out = new cf_raster{raster->img.channels() == 1 ? raster->img
                                                     : to_grayscale(raster->img)};
  });
}

cf_status cf_config_create(cf_config** out) {
  if (out == nullptr) return fail(CF_ERR_INVALID, "cf_config_create: NULL output");
  *out = nullptr;
  return guarded([&] { *out = new cf_config(); });
}

void cf_config_free(cf_config* config) { delete config; }

cf_status cf_config_set(cf_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) {
    return fail(CF_ERR_INVALID, "cf_config_set: NULL argument");
  }
  return guarded([&] {
    if (std::strcmp(key, "threads") == 0) {
      int threads = 0;
      try {
        std::size_t used = 0;
        threads = std::stoi(value, &used);
        if (used != std::strlen(value)) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw InvalidArgument("config: value '" + std::string(value) +
                              "' for 'threads' is not an integer");
      }
      if (threads < 1) throw InvalidArgument("config: threads must be >= 1");
      config->threads = threads;
    } else {
      apply_config_kv(config->cfg, key, value);
    }
  });
}

cf_status cf_config_load_file(cf_config* config, const char* path) {
  if (config == nullptr || path == nullptr) {
    return fail(CF_ERR_INVALID, "cf_config_load_file: NULL argument");
  }
  return guarded([&] { config->cfg = load_config_file(path, config->cfg); });
}

cf_status cf_train(const cf_raster* const* references, int ref_count,
                   const cf_config* config, cf_model** out,
                   int* per_ref_superpixels) {
  if (references == nullptr || ref_count < 1 || config == nullptr || out == nullptr) {
    return fail(CF_ERR_INVALID, "cf_train: NULL argument or empty reference list");
  }
  for (int i = 0; i < ref_count; ++i) {
    if (references[i] == nullptr) {
      return fail(CF_ERR_INVALID, "cf_train: NULL reference raster");
    }
  }
  *out = nullptr;
  return guarded([&] {
    std::vector<Raster> refs;
    refs.reserve(ref_count);
    for (int i = 0; i < ref_count; ++i) {
      const Raster& img = references[i]->img;
      refs.push_back(img.channels() == 1 ? gray_to_rgb(img) : img);
    }
    TrainStats stats;
    Model model = train_model(refs, config->cfg, config->threads, &stats);
    if (per_ref_superpixels != nullptr) {
      for (int i = 0; i < ref_count; ++i) {
        per_ref_superpixels[i] = stats.superpixels_per_reference[i];
      }
    }
    *out = new cf_model{std::move(model)};
  });
}

cf_status cf_model_save(const cf_model* model, const char* path) {
  if (model == nullptr || path == nullptr) {
    return fail(CF_ERR_INVALID, "cf_model_save: NULL argument");
  }
  return guarded([&] { save_model(model->model, path); });
}

cf_status cf_model_load(const char* path, cf_model** out) {
  if (path == nullptr || out == nullptr) {
    return fail(CF_ERR_INVALID, "cf_model_load: NULL argument");
  }
  *out = nullptr;
  return guarded([&] { *out = new cf_model{load_model(path)}; });
}

void cf_model_free(cf_model* model) { delete model; }

int cf_model_palette_size(const cf_model* model) {
  return model == nullptr ? 0 : model->model.palette.size();
}

int cf_model_tree_count(const cf_model* model) {
  return model == nullptr ? 0 : static_cast<int>(model->model.forest.trees.size());
}

cf_status cf_colorize(const cf_model* model, const cf_raster* gray,
                      const cf_colorize_options* options, cf_raster** out) {
  if (model == nullptr || gray == nullptr || out == nullptr) {
    return fail(CF_ERR_INVALID, "cf_colorize: NULL argument");
  }
  *out = nullptr;
  return guarded([&] {
    const Raster input = gray->img.channels() == 1 ? gray->img
                                                   : to_grayscale(gray->img);
    std::vector<std::pair<int, int>> merges;
    if (options != nullptr && options->merge_map_path != nullptr) {
      merges = read_merge_map(options->merge_map_path);
    }
    const bool want_trace =
        options != nullptr &&
        (options->dump_segments_path != nullptr ||
         options->dump_superpixels_path != nullptr ||
         options->dump_scribbles_path != nullptr);
    ColorizeTrace trace;
    Raster result = colorize(input, model->model, merges,
                             want_trace ? &trace : nullptr);
    if (want_trace) {
      if (options->dump_segments_path != nullptr) {
        save_label_png16(trace.segmentation.seg_labels, input.width(),
                         input.height(), options->dump_segments_path);
      }
      if (options->dump_superpixels_path != nullptr) {
        save_label_png16(trace.superpixels.labels, input.width(), input.height(),
                         options->dump_superpixels_path);
      }
      if (options->dump_scribbles_path != nullptr) {
        write_scribble_dump(trace.scribbles, input.width(),
                            options->dump_scribbles_path);
      }
    }
    *out = new cf_raster{std::move(result)};
  });
}

cf_status cf_evaluate(const cf_raster* result, const cf_raster* truth,
                      double* mean_ab_error, double* psnr) {
  if (result == nullptr || truth == nullptr || mean_ab_error == nullptr ||
      psnr == nullptr) {
    return fail(CF_ERR_INVALID, "cf_evaluate: NULL argument");
  }
  return guarded([&] {
    const Raster a =
        result->img.channels() == 1 ? gray_to_rgb(result->img) : result->img;
    const Raster b =
        truth->img.channels() == 1 ? gray_to_rgb(truth->img) : truth->img;
    const EvalMetrics m = evaluate(a, b);
    *mean_ab_error = m.mean_ab_error;
    *psnr = m.psnr;
  });
}

}  // extern "C"
