#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "errors.hpp"
#include "superpixel.hpp"
#include "support.hpp"

using namespace colorforest;

namespace {

void check_map_consistency(const SuperpixelMap& sp) {
  REQUIRE(sp.count > 0);
  REQUIRE(static_cast<int>(sp.members.size()) == sp.count);
  REQUIRE(static_cast<int>(sp.centroids.size()) == sp.count);
  REQUIRE(static_cast<int>(sp.neighbors.size()) == sp.count);
  REQUIRE(static_cast<int>(sp.labels.size()) == sp.width * sp.height);

  // members mirror labels exactly and stay sorted
  std::size_t total = 0;
  for (int id = 0; id < sp.count; ++id) {
    REQUIRE(!sp.members[id].empty());
    CHECK(std::is_sorted(sp.members[id].begin(), sp.members[id].end()));
    for (int px : sp.members[id]) {
      REQUIRE(px >= 0);
      REQUIRE(px < sp.width * sp.height);
      CHECK(sp.labels[px] == id);
    }
    total += sp.members[id].size();

    // centroid is the mean member coordinate
    double mr = 0.0;
    double mc = 0.0;
    for (int px : sp.members[id]) {
      mr += px / sp.width;
      mc += px % sp.width;
    }
    mr /= sp.members[id].size();
    mc /= sp.members[id].size();
    CHECK(sp.centroids[id].first == doctest::Approx(mr).epsilon(1e-12));
    CHECK(sp.centroids[id].second == doctest::Approx(mc).epsilon(1e-12));
  }
  CHECK(total == sp.labels.size());

  // adjacency matches the label image: symmetric, irreflexive, sorted
  std::set<std::pair<int, int>> expected;
  for (int r = 0; r < sp.height; ++r) {
    for (int c = 0; c < sp.width; ++c) {
      const int a = sp.labels[r * sp.width + c];
      if (c + 1 < sp.width) {
        const int b = sp.labels[r * sp.width + c + 1];
        if (a != b) {
          expected.insert({a, b});
          expected.insert({b, a});
        }
      }
      if (r + 1 < sp.height) {
        const int b = sp.labels[(r + 1) * sp.width + c];
        if (a != b) {
          expected.insert({a, b});
          expected.insert({b, a});
        }
      }
    }
  }
  std::set<std::pair<int, int>> actual;
  for (int id = 0; id < sp.count; ++id) {
    CHECK(std::is_sorted(sp.neighbors[id].begin(), sp.neighbors[id].end()));
    for (int nb : sp.neighbors[id]) {
      CHECK(nb != id);
      actual.insert({id, nb});
    }
  }
  CHECK(actual == expected);
}

}  // namespace

TEST_CASE("superpixels partition random rasters into connected regions") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Raster img = seed % 2 ? testsupport::noise_raster(64, 48, seed)
                          : testsupport::smooth_raster(64, 48, seed);
    SuperpixelMap sp = extract_superpixels(img, 40);
    CHECK(testsupport::check_connected_partition(sp.labels, 64, 48) == sp.count);
    check_map_consistency(sp);

    const double mean_area = static_cast<double>(64 * 48) / sp.count;
    CHECK(mean_area >= 20.0);
    CHECK(mean_area <= 60.0);
  }
}

TEST_CASE("superpixel extraction is deterministic") {
  Raster img = testsupport::noise_raster(48, 32, 99);
  SuperpixelMap a = extract_superpixels(img, 40);
  SuperpixelMap b = extract_superpixels(img, 40);
  CHECK(a.count == b.count);
  CHECK(a.labels == b.labels);
}

TEST_CASE("superpixel count tracks the size target") {
  Raster img = testsupport::smooth_raster(200, 200, 7);
  SuperpixelMap sp = extract_superpixels(img, 40);
  CHECK(sp.count >= 800);
  CHECK(sp.count <= 1200);

  SuperpixelMap coarse = extract_superpixels(img, 160);
  CHECK(coarse.count < sp.count);
}

TEST_CASE("tiny raster collapses to a single superpixel") {
  Raster img(8, 5, 1);
  for (auto& v : img.samples()) v = 0.5;
  SuperpixelMap sp = extract_superpixels(img, 40);
  REQUIRE(sp.count == 1);
  CHECK(sp.members[0].size() == 40);
  CHECK(sp.centroids[0].first == doctest::Approx(2.0));
  CHECK(sp.centroids[0].second == doctest::Approx(3.5));
  CHECK(sp.neighbors[0].empty());
  // ties on the centroid distance resolve to the smaller pixel index
  CHECK(centroid_pixel(sp, 0) == 2 * 8 + 3);
  CHECK_THROWS_AS(centroid_pixel(sp, 1), InvalidArgument);
}

TEST_CASE("map from labels validates density") {
  SUBCASE("valid labels build a full map") {
    // two vertical strips
    std::vector<int> labels = {0, 0, 1, 1, 0, 0, 1, 1};
    SuperpixelMap sp = superpixel_map_from_labels(4, 2, labels);
    CHECK(sp.count == 2);
    CHECK(sp.members[0] == std::vector<int>{0, 1, 4, 5});
    CHECK(sp.members[1] == std::vector<int>{2, 3, 6, 7});
    CHECK(sp.neighbors[0] == std::vector<int>{1});
    CHECK(sp.neighbors[1] == std::vector<int>{0});
  }
  SUBCASE("skipped id throws") {
    std::vector<int> labels = {0, 0, 2, 2};
    CHECK_THROWS_AS(superpixel_map_from_labels(4, 1, labels), InvalidArgument);
  }
  SUBCASE("negative id throws") {
    std::vector<int> labels = {0, -1, 0, 0};
    CHECK_THROWS_AS(superpixel_map_from_labels(4, 1, labels), InvalidArgument);
  }
  SUBCASE("wrong length throws") {
    std::vector<int> labels = {0, 0};
    CHECK_THROWS_AS(superpixel_map_from_labels(4, 1, labels), InvalidArgument);
  }
}

TEST_CASE("centroid pixel is the nearest member") {
  // L-shaped region: centroid falls outside the member set
  std::vector<int> labels = {0, 0, 0, 0, 1, 1, 0, 1, 1};
  SuperpixelMap sp = superpixel_map_from_labels(3, 3, labels);
  for (int id = 0; id < sp.count; ++id) {
    const int px = centroid_pixel(sp, id);
    CHECK(std::find(sp.members[id].begin(), sp.members[id].end(), px) !=
          sp.members[id].end());
    const double pr = px / 3;
    const double pc = px % 3;
    const double best = std::hypot(pr - sp.centroids[id].first,
                                   pc - sp.centroids[id].second);
    for (int other : sp.members[id]) {
      const double d = std::hypot(other / 3 - sp.centroids[id].first,
                                  other % 3 - sp.centroids[id].second);
      CHECK(best <= d + 1e-12);
    }
  }
}
