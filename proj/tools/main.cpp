#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "colorforest/colorforest.h"

namespace {

namespace fs = std::filesystem;

struct RasterDeleter {
  void operator()(cf_raster* r) const { cf_raster_free(r); }
};
struct ConfigDeleter {
  void operator()(cf_config* c) const { cf_config_free(c); }
};
struct ModelDeleter {
  void operator()(cf_model* m) const { cf_model_free(m); }
};
using RasterPtr = std::unique_ptr<cf_raster, RasterDeleter>;
using ConfigPtr = std::unique_ptr<cf_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<cf_model, ModelDeleter>;

int fail(cf_status status, const std::string& context = {}) {
  std::cerr << "error: ";
  if (!context.empty()) std::cerr << context << ": ";
  std::cerr << cf_last_error() << "\n";
  return static_cast<int>(status);
}

struct TrainArgs {
  std::vector<std::string> refs;
  std::string out;
  std::string config;
  int clusters = 0;
  int trees = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool has_clusters = false;
  bool has_trees = false;
  bool has_seed = false;
  bool has_threads = false;
};

int run_train(const TrainArgs& args) {
  ConfigPtr config;
  {
    cf_config* raw = nullptr;
    if (const cf_status st = cf_config_create(&raw); st != CF_OK) return fail(st);
    config.reset(raw);
  }
  if (!args.config.empty()) {
    if (const cf_status st = cf_config_load_file(config.get(), args.config.c_str());
        st != CF_OK) {
      return fail(st);
    }
  }
  // Explicit flags win over config-file values.
  auto set = [&](const char* key, const std::string& value) -> cf_status {
    return cf_config_set(config.get(), key, value.c_str());
  };
  if (args.has_clusters) {
    if (const cf_status st = set("clusters", std::to_string(args.clusters)); st != CF_OK)
      return fail(st);
  }
  if (args.has_trees) {
    if (const cf_status st = set("trees", std::to_string(args.trees)); st != CF_OK)
      return fail(st);
  }
  if (args.has_seed) {
    if (const cf_status st = set("seed", std::to_string(args.seed)); st != CF_OK)
      return fail(st);
  }
  if (args.has_threads) {
    if (const cf_status st = set("threads", std::to_string(args.threads)); st != CF_OK)
      return fail(st);
  }

  std::vector<RasterPtr> refs;
  std::vector<const cf_raster*> ref_ptrs;
  for (const std::string& path : args.refs) {
    cf_raster* raw = nullptr;
    if (const cf_status st = cf_raster_load_png(path.c_str(), &raw); st != CF_OK) {
      return fail(st, path);
    }
    refs.emplace_back(raw);
    ref_ptrs.push_back(raw);
  }

  std::vector<int> superpixels(refs.size(), 0);
  cf_model* model_raw = nullptr;
  const auto started = std::chrono::steady_clock::now();
  if (const cf_status st =
          cf_train(ref_ptrs.data(), static_cast<int>(ref_ptrs.size()), config.get(),
                   &model_raw, superpixels.data());
      st != CF_OK) {
    return fail(st);
  }
  ModelPtr model(model_raw);
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - started;

  for (std::size_t i = 0; i < refs.size(); ++i) {
    std::printf("reference %zu: %d superpixels (%s)\n", i, superpixels[i],
                args.refs[i].c_str());
  }
  std::printf("palette size: %d\n", cf_model_palette_size(model.get()));
  std::printf("training time: %.2f s\n", elapsed.count());

  if (const cf_status st = cf_model_save(model.get(), args.out.c_str()); st != CF_OK) {
    return fail(st, args.out);
  }
  return 0;
}

struct ColorizeArgs {
  std::string model;
  std::string input;
  std::string output;
  std::string merge_map;
  std::string dump_segments;
  std::string dump_superpixels;
  std::string dump_scribbles;
};

int run_colorize(const ColorizeArgs& args) {
  cf_model* model_raw = nullptr;
  if (const cf_status st = cf_model_load(args.model.c_str(), &model_raw); st != CF_OK) {
    return fail(st, args.model);
  }
  ModelPtr model(model_raw);

  cf_raster* input_raw = nullptr;
  if (const cf_status st = cf_raster_load_png(args.input.c_str(), &input_raw);
      st != CF_OK) {
    return fail(st, args.input);
  }
  RasterPtr input(input_raw);

  cf_colorize_options options{};
  options.merge_map_path = args.merge_map.empty() ? nullptr : args.merge_map.c_str();
  options.dump_segments_path =
      args.dump_segments.empty() ? nullptr : args.dump_segments.c_str();
  options.dump_superpixels_path =
      args.dump_superpixels.empty() ? nullptr : args.dump_superpixels.c_str();
  options.dump_scribbles_path =
      args.dump_scribbles.empty() ? nullptr : args.dump_scribbles.c_str();

  cf_raster* result_raw = nullptr;
  if (const cf_status st =
          cf_colorize(model.get(), input.get(), &options, &result_raw);
      st != CF_OK) {
    return fail(st);
  }
  RasterPtr result(result_raw);

  if (const cf_status st = cf_raster_save_png(result.get(), args.output.c_str());
      st != CF_OK) {
    return fail(st, args.output);
  }
  return 0;
}

struct VideoArgs {
  std::string model;
  std::string frames;
  std::string out;
};

int run_video(const VideoArgs& args) {
  cf_model* model_raw = nullptr;
  if (const cf_status st = cf_model_load(args.model.c_str(), &model_raw); st != CF_OK) {
    return fail(st, args.model);
  }
  ModelPtr model(model_raw);

  std::error_code ec;
  std::vector<fs::path> frames;
  for (const fs::directory_entry& entry : fs::directory_iterator(args.frames, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      frames.push_back(entry.path());
    }
  }
  if (ec) {
    std::cerr << "error: cannot read frame directory '" << args.frames
              << "': " << ec.message() << "\n";
    return 2;
  }
  if (frames.empty()) {
    std::cerr << "error: no .png frames in '" << args.frames << "'\n";
    return 2;
  }
  std::sort(frames.begin(), frames.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });

  fs::create_directories(args.out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << args.out
              << "': " << ec.message() << "\n";
    return 2;
  }

  // Frames are independent; each failure names its frame.
  for (const fs::path& frame : frames) {
    cf_raster* input_raw = nullptr;
    if (const cf_status st = cf_raster_load_png(frame.c_str(), &input_raw);
        st != CF_OK) {
      return fail(st, frame.filename().string());
    }
    RasterPtr input(input_raw);

    cf_raster* result_raw = nullptr;
    if (const cf_status st = cf_colorize(model.get(), input.get(), nullptr, &result_raw);
        st != CF_OK) {
      return fail(st, frame.filename().string());
    }
    RasterPtr result(result_raw);

    const fs::path out_path = fs::path(args.out) / frame.filename();
    if (const cf_status st = cf_raster_save_png(result.get(), out_path.c_str());
        st != CF_OK) {
      return fail(st, out_path.string());
    }
  }
  return 0;
}

struct EvalArgs {
  std::string result;
  std::string truth;
};

int run_eval(const EvalArgs& args) {
  cf_raster* result_raw = nullptr;
  if (const cf_status st = cf_raster_load_png(args.result.c_str(), &result_raw);
      st != CF_OK) {
    return fail(st, args.result);
  }
  RasterPtr result(result_raw);

  cf_raster* truth_raw = nullptr;
  if (const cf_status st = cf_raster_load_png(args.truth.c_str(), &truth_raw);
      st != CF_OK) {
    return fail(st, args.truth);
  }
  RasterPtr truth(truth_raw);

  double mean_ab = 0.0;
  double psnr = 0.0;
  if (const cf_status st = cf_evaluate(result.get(), truth.get(), &mean_ab, &psnr);
      st != CF_OK) {
    return fail(st);
  }
  std::printf("mean_ab_error=%.3f psnr=%.3f\n", mean_ab, psnr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Colorizes grayscale images from color reference examples"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a model from color references");
  train->add_option("--refs", train_args.refs, "Reference PNG files")
      ->required()
      ->expected(-1);
  train->add_option("--out", train_args.out, "Output model file")->required();
  train->add_option("--clusters", train_args.clusters, "Chroma cluster count");
  train->add_option("--trees", train_args.trees, "Decision tree count");
  train->add_option("--seed", train_args.seed, "Master RNG seed (default 42)");
  train->add_option("--config", train_args.config, "key=value config file");
  train->add_option("--threads", train_args.threads, "Training worker threads");

  ColorizeArgs colorize_args;
  CLI::App* colorize = app.add_subcommand("colorize", "Colorize one grayscale PNG");
  colorize->add_option("--model", colorize_args.model, "Trained model file")->required();
  colorize->add_option("--input", colorize_args.input, "Grayscale input PNG")->required();
  colorize->add_option("--output", colorize_args.output, "Output PNG")->required();
  colorize->add_option("--merge-map", colorize_args.merge_map,
                       "Segment merge file: '<id> <id>' per line");
  colorize->add_option("--dump-segments", colorize_args.dump_segments,
                       "Write segment ids as a 16-bit PNG");
  colorize->add_option("--dump-superpixels", colorize_args.dump_superpixels,
                       "Write superpixel ids as a 16-bit PNG");
  colorize->add_option("--dump-scribbles", colorize_args.dump_scribbles,
                       "Write scribbles as 'row col U V' lines");

  VideoArgs video_args;
  CLI::App* video = app.add_subcommand("video", "Colorize every frame in a directory");
  video->add_option("--model", video_args.model, "Trained model file")->required();
  video->add_option("--frames", video_args.frames, "Directory of input PNG frames")
      ->required();
  video->add_option("--out", video_args.out, "Output directory")->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Compare a result against ground truth");
  eval->add_option("--result", eval_args.result, "Result PNG")->required();
  eval->add_option("--truth", eval_args.truth, "Ground-truth PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are exit 1; --help is success
  }

  train_args.has_clusters = train->count("--clusters") > 0;
  train_args.has_trees = train->count("--trees") > 0;
  train_args.has_seed = train->count("--seed") > 0;
  train_args.has_threads = train->count("--threads") > 0;

  if (train->parsed()) return run_train(train_args);
  if (colorize->parsed()) return run_colorize(colorize_args);
  if (video->parsed()) return run_video(video_args);
  if (eval->parsed()) return run_eval(eval_args);
  return 1;
}
