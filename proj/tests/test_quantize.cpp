#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "errors.hpp"
#include "quantize.hpp"
#include "rng.hpp"

using namespace colorforest;

namespace {

using Points = std::vector<std::pair<double, double>>;

Points random_points(int n, std::uint64_t seed, double span = 60.0) {
  Points pts(n);
  SplitMix64 rng(seed);
  for (auto& p : pts) {
    p.first = (rng.uniform() - 0.5) * span;
    p.second = (rng.uniform() - 0.5) * span;
  }
  return pts;
}

double sq_dist(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  const double da = a.first - b.first;
  const double db = a.second - b.second;
  return da * da + db * db;
}

}  // namespace

TEST_CASE("single cluster lands on the mean") {
  Points pts = {{1.0, 2.0}, {3.0, 6.0}, {5.0, 4.0}, {-1.0, 0.0}};
  QuantizeResult res = quantize_chroma(pts, 1, 7);
  REQUIRE(res.palette.size() == 1);
  CHECK(res.palette.centers[0].first == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(res.palette.centers[0].second == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(res.labels == std::vector<int>(4, 0));
}

TEST_CASE("well separated groups are recovered exactly") {
  Points pts;
  for (int i = 0; i < 20; ++i) pts.push_back({10.0 + 0.01 * i, 10.0});
  for (int i = 0; i < 20; ++i) pts.push_back({-10.0 - 0.01 * i, -10.0});
  QuantizeResult res = quantize_chroma(pts, 2, 123);
  REQUIRE(res.palette.size() == 2);

  // each group maps to one label and the centers are the group means
  CHECK(res.labels[0] == res.labels[10]);
  CHECK(res.labels[20] == res.labels[30]);
  CHECK(res.labels[0] != res.labels[20]);
  const auto& c_pos = res.palette.centers[res.labels[0]];
  CHECK(c_pos.first == doctest::Approx(10.0 + 0.01 * 9.5).epsilon(1e-12));
  CHECK(c_pos.second == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("k equal to the number of distinct points gives zero distortion") {
  Points pts = {{0, 0}, {5, 0}, {0, 5}, {5, 5}, {2.5, 9}};
  QuantizeResult res = quantize_chroma(pts, 5, 99);
  REQUIRE(res.palette.size() == 5);
  std::set<int> used(res.labels.begin(), res.labels.end());
  CHECK(used.size() == 5);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(sq_dist(pts[i], res.palette.centers[res.labels[i]]) == 0.0);
  }
}

TEST_CASE("k beyond the distinct value count is rejected") {
  Points pts = {{1, 1}, {1, 1}, {2, 2}};
  CHECK_THROWS_WITH_AS(quantize_chroma(pts, 3, 1).palette.size(),
                       doctest::Contains("distinct"), InvalidArgument);
  CHECK_NOTHROW(quantize_chroma(pts, 2, 1));
}

TEST_CASE("invalid arguments are rejected") {
  Points pts = {{1, 1}, {2, 2}};
  CHECK_THROWS_AS(quantize_chroma({}, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(quantize_chroma(pts, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(quantize_chroma(pts, 1, 0, 0), InvalidArgument);
}

TEST_CASE("assignments are nearest-center and every cluster is used") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    Points pts = random_points(120, seed);
    QuantizeResult res = quantize_chroma(pts, 6, seed * 31 + 5);
    REQUIRE(res.palette.size() == 6);
    REQUIRE(res.labels.size() == pts.size());

    std::vector<int> counts(6, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int got = res.labels[i];
      ++counts[got];
      const double chosen = sq_dist(pts[i], res.palette.centers[got]);
      for (int c = 0; c < 6; ++c) {
        CHECK(chosen <= sq_dist(pts[i], res.palette.centers[c]) + 1e-12);
      }
    }
    for (int c = 0; c < 6; ++c) CHECK(counts[c] > 0);

    // centers sit on the mean of their assigned points
    for (int c = 0; c < 6; ++c) {
      double ma = 0.0;
      double mb = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (res.labels[i] == c) {
          ma += pts[i].first;
          mb += pts[i].second;
        }
      }
      ma /= counts[c];
      mb /= counts[c];
      CHECK(res.palette.centers[c].first == doctest::Approx(ma).epsilon(1e-9));
      CHECK(res.palette.centers[c].second == doctest::Approx(mb).epsilon(1e-9));
    }
  }
}

TEST_CASE("quantization is deterministic in the seed") {
  Points pts = random_points(200, 77);
  QuantizeResult a = quantize_chroma(pts, 8, 1234);
  QuantizeResult b = quantize_chroma(pts, 8, 1234);
  CHECK(a.labels == b.labels);
  CHECK(a.palette.centers == b.palette.centers);
}

TEST_CASE("label lookup round trips and validates") {
  ChromaPalette palette;
  palette.centers = {{4.0, -3.0}, {1.0, 2.0}};
  auto [pa, pb] = label_to_chroma(palette, 1);
  CHECK(pa == 1.0);
  CHECK(pb == 2.0);
  CHECK_THROWS_AS(label_to_chroma(palette, 2), InvalidArgument);
  CHECK_THROWS_AS(label_to_chroma(palette, -1), InvalidArgument);
}
