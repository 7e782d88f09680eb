#include "quantize.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace colorforest {

namespace {

double sq_dist(const std::pair<double, double>& p, const std::pair<double, double>& q) {
  const double da = p.first - q.first;
  const double db = p.second - q.second;
  return da * da + db * db;
}

// Nearest center, ties to the lowest index.
int nearest(const std::vector<std::pair<double, double>>& centers,
            const std::pair<double, double>& p) {
  int best = 0;
  double best_d = sq_dist(centers[0], p);
  for (int j = 1; j < static_cast<int>(centers.size()); ++j) {
    const double d = sq_dist(centers[j], p);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<std::pair<double, double>> seed_centers(
    const std::vector<std::pair<double, double>>& points, int k, SplitMix64& rng) {
  const std::size_t n = points.size();
  std::vector<std::pair<double, double>> centers;
  centers.reserve(k);
  centers.push_back(points[rng.below(n)]);
  std::vector<double> weight(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = sq_dist(points[i], centers[0]);
      for (std::size_t j = 1; j < centers.size(); ++j) {
        d = std::min(d, sq_dist(points[i], centers[j]));
      }
      weight[i] = d;
      total += d;
    }
    // total > 0: fewer centers than distinct points so far.
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      cum += weight[i];
      if (cum > u) {
        pick = i;
        break;
      }
    }
    if (pick == n) {
      // Rounding pushed u past the final cumulative sum; take the last
      // point with positive weight.
      for (std::size_t i = n; i-- > 0;) {
        if (weight[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(points[pick]);
  }
  return centers;
}

}  // namespace

QuantizeResult quantize_chroma(const std::vector<std::pair<double, double>>& points,
                               int k, std::uint64_t seed, int max_iterations) {
  if (points.empty()) throw InvalidArgument("quantize_chroma: no input points");
  if (k <= 0) throw InvalidArgument("quantize_chroma: k must be positive");
  if (max_iterations <= 0) {
    throw InvalidArgument("quantize_chroma: max_iterations must be positive");
  }

  std::vector<std::pair<double, double>> distinct(points);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<std::size_t>(k) > distinct.size()) {
    throw InvalidArgument("quantize_chroma: k=" + std::to_string(k) +
                          " exceeds the " + std::to_string(distinct.size()) +
                          " distinct chroma values present");
  }

  const std::size_t n = points.size();
  SplitMix64 rng(seed);
  std::vector<std::pair<double, double>> centers = seed_centers(points, k, rng);

  // Seed centers are distinct points, so the initial assignment leaves no
  // cluster empty: each center captures at least its own seed.
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = nearest(centers, points[i]);

  auto update_centers = [&]() {
    std::vector<double> sum_a(k, 0.0), sum_b(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum_a[labels[i]] += points[i].first;
      sum_b[labels[i]] += points[i].second;
      ++count[labels[i]];
    }
    for (int j = 0; j < k; ++j) {
      centers[j] = {sum_a[j] / static_cast<double>(count[j]),
                    sum_b[j] / static_cast<double>(count[j])};
    }
  };

  for (int it = 0; it < max_iterations; ++it) {
    update_centers();
    std::vector<int> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = nearest(centers, points[i]);

    // Re-seed any cluster the reassignment emptied: move in the point
    // farthest from its own center (ties to the lowest index), never
    // draining a cluster down to zero.
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) ++count[next[i]];
    for (int j = 0; j < k; ++j) {
      if (count[j] != 0) continue;
      std::size_t pick = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[next[i]] <= 1) continue;
        const double d = sq_dist(points[i], centers[next[i]]);
        if (d > far_d) {
          far_d = d;
          pick = i;
        }
      }
      if (pick == n) break;  // k == n and all singletons; nothing to move
      --count[next[pick]];
      next[pick] = j;
      count[j] = 1;
      centers[j] = points[pick];
    }

    if (next == labels) break;
    labels = next;
  }

  update_centers();
  QuantizeResult result;
  result.palette.centers = std::move(centers);
  result.labels = std::move(labels);
  return result;
}

std::pair<double, double> label_to_chroma(const ChromaPalette& palette, int label) {
  if (label < 0 || label >= palette.size()) {
    throw InvalidArgument("label_to_chroma: label " + std::to_string(label) +
                          " outside palette of size " + std::to_string(palette.size()));
  }
  return palette.centers[label];
}

}  // namespace colorforest
