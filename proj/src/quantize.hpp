#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace colorforest {

// Discrete chroma vocabulary: CIELab (a, b) cluster centers indexed by label.
struct ChromaPalette {
  std::vector<std::pair<double, double>> centers;

  int size() const { return static_cast<int>(centers.size()); }
};

struct QuantizeResult {
  ChromaPalette palette;
  std::vector<int> labels;  // per input point, 0..k-1
};

// k-means over (a, b) pairs: k-means++ seeding from `seed`, Lloyd iterations
// to an assignment fixpoint (at most max_iterations), empty clusters re-seeded
// from the point farthest from its current center. Every returned center is
// the mean of its assigned points and every label occurs at least once.
// Throws if k exceeds the number of distinct input points.
QuantizeResult quantize_chroma(const std::vector<std::pair<double, double>>& points,
                               int k, std::uint64_t seed, int max_iterations = 100);

std::pair<double, double> label_to_chroma(const ChromaPalette& palette, int label);

}  // namespace colorforest
