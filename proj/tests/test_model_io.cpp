#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "errors.hpp"
#include "model_io.hpp"
#include "pipeline.hpp"
#include "support.hpp"

using namespace colorforest;

namespace {

// Tiny but real model: two chroma classes learned from two flat tones.
Model tiny_model() {
  PipelineConfig cfg;
  cfg.clusters = 2;
  cfg.trees = 3;
  cfg.target_superpixel_size = 16;
  Raster ref(32, 32, 3);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      const bool left = c < 16;
      ref.at(0, r, c) = left ? 0.8 : 0.2;
      ref.at(1, r, c) = left ? 0.3 : 0.5;
      ref.at(2, r, c) = left ? 0.2 : 0.9;
    }
  }
  return train_model({ref}, cfg);
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "colorforest_model_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("serialization round trips byte for byte") {
  Model model = tiny_model();
  const std::string text = serialize_model(model);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"CFM\"") != std::string::npos);

  Model back = parse_model(text);
  CHECK(serialize_model(back) == text);

  // parsed model behaves identically
  CHECK(back.palette.size() == model.palette.size());
  CHECK(back.forest.trees.size() == model.forest.trees.size());
  CHECK(back.config.seed == model.config.seed);
  CHECK(back.feature_scales.gabor == model.feature_scales.gabor);
  CHECK(back.feature_scales.sift == model.feature_scales.sift);

  FeatureVector probe{};
  probe[0] = 0.4;
  probe[2] = 0.01;
  const auto p1 = predict(model.forest, probe);
  const auto p2 = predict(back.forest, probe);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("file save and load round trip") {
  Model model = tiny_model();
  const auto path = temp_dir() / "model.json";
  save_model(model, path.string());
  Model back = load_model(path.string());
  CHECK(serialize_model(back) == serialize_model(model));

  CHECK_THROWS_AS(load_model((temp_dir() / "absent.json").string()), IoError);
}

TEST_CASE("malformed model files are io errors") {
  Model model = tiny_model();
  const std::string text = serialize_model(model);

  SUBCASE("truncated json") {
    CHECK_THROWS_AS(parse_model(text.substr(0, text.size() / 2)), IoError);
  }
  SUBCASE("not json at all") {
    CHECK_THROWS_AS(parse_model("not a model"), IoError);
  }
  SUBCASE("wrong format tag") {
    std::string bad = text;
    bad.replace(bad.find("\"CFM\""), 5, "\"ZIP\"");
    CHECK_THROWS_AS(parse_model(bad), IoError);
  }
  SUBCASE("unsupported version") {
    std::string bad = text;
    const auto pos = bad.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 11, "\"version\":2");
    CHECK_THROWS_WITH_AS(parse_model(bad), doctest::Contains("version"), IoError);
  }
  SUBCASE("missing palette") {
    std::string bad = text;
    const auto pos = bad.find("\"palette\"");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 9, "\"palete\"");
    CHECK_THROWS_AS(parse_model(bad), IoError);
  }
  SUBCASE("tree record with dangling children") {
    std::string bad = text;
    // drop the final leaf record of the last tree: the pre-order walk runs
    // out of records
    const auto pos = bad.rfind(",{\"dist\":");
    REQUIRE(pos != std::string::npos);
    const auto end = bad.find("}", pos);
    bad.erase(pos, end - pos + 1);
    CHECK_THROWS_AS(parse_model(bad), IoError);
  }
}

TEST_CASE("serialization is independent of in-memory history") {
  // two separately trained but identical models serialize identically
  Model a = tiny_model();
  Model b = tiny_model();
  CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("config key parsing covers every field") {
  PipelineConfig cfg;
  apply_config_kv(cfg, "target_superpixel_size", "25");
  apply_config_kv(cfg, "clusters", "9");
  apply_config_kv(cfg, "trees", "17");
  apply_config_kv(cfg, "dims_per_node", "5");
  apply_config_kv(cfg, "thresholds_per_dim", "7");
  apply_config_kv(cfg, "min_gain", "0.25");
  apply_config_kv(cfg, "max_depth", "12");
  apply_config_kv(cfg, "min_node", "4");
  apply_config_kv(cfg, "bootstrap", "false");
  apply_config_kv(cfg, "spatial_bandwidth", "3.5");
  apply_config_kv(cfg, "range_bandwidth", "1.25");
  apply_config_kv(cfg, "min_region", "11");
  apply_config_kv(cfg, "cg_tolerance", "1e-8");
  apply_config_kv(cfg, "seed", "12345678901234567890");

  CHECK(cfg.target_superpixel_size == 25);
  CHECK(cfg.clusters == 9);
  CHECK(cfg.trees == 17);
  CHECK(cfg.dims_per_node == 5);
  CHECK(cfg.thresholds_per_dim == 7);
  CHECK(cfg.min_gain == 0.25);
  CHECK(cfg.max_depth == 12);
  CHECK(cfg.min_node == 4);
  CHECK(cfg.bootstrap == false);
  CHECK(cfg.spatial_bandwidth == 3.5);
  CHECK(cfg.range_bandwidth == 1.25);
  CHECK(cfg.min_region == 11);
  CHECK(cfg.cg_tolerance == 1e-8);
  CHECK(cfg.seed == 12345678901234567890ull);

  apply_config_kv(cfg, "bootstrap", "true");
  CHECK(cfg.bootstrap == true);
  apply_config_kv(cfg, "bootstrap", "0");
  CHECK(cfg.bootstrap == false);

  CHECK_THROWS_WITH_AS(apply_config_kv(cfg, "tres", "2"),
                       doctest::Contains("unknown key"), InvalidArgument);
  CHECK_THROWS_AS(apply_config_kv(cfg, "trees", "abc"), InvalidArgument);
  CHECK_THROWS_AS(apply_config_kv(cfg, "trees", "3.5"), InvalidArgument);
  CHECK_THROWS_AS(apply_config_kv(cfg, "min_gain", "fast"), InvalidArgument);
  CHECK_THROWS_AS(apply_config_kv(cfg, "bootstrap", "maybe"), InvalidArgument);
}

TEST_CASE("config files parse with comments and report bad lines") {
  const auto dir = temp_dir();

  SUBCASE("valid file") {
    const auto path = dir / "good.cfg";
    std::ofstream out(path);
    out << "# pipeline overrides\n"
        << "trees = 7\n"
        << "\n"
        << "clusters=4   # inline comment\n"
        << "min_gain = 0.5\n";
    out.close();
    PipelineConfig cfg = load_config_file(path.string());
    CHECK(cfg.trees == 7);
    CHECK(cfg.clusters == 4);
    CHECK(cfg.min_gain == 0.5);
    CHECK(cfg.max_depth == 64);  // untouched default
  }

  SUBCASE("missing separator names the line") {
    const auto path = dir / "bad.cfg";
    std::ofstream out(path);
    out << "trees = 7\nnonsense line\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_config_file(path.string()),
                         doctest::Contains("line 2"), InvalidArgument);
  }

  SUBCASE("unknown key names the line") {
    const auto path = dir / "unknown.cfg";
    std::ofstream out(path);
    out << "# header\n\nsped = 3\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_config_file(path.string()),
                         doctest::Contains("line 3"), InvalidArgument);
  }

  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(load_config_file((dir / "nope.cfg").string()), IoError);
  }
}
