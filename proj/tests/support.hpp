#pragma once

// Helpers shared by the test binaries: deterministic raster generators, a
// dense linear solver used as an oracle, and structural checks on label maps.

#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "raster.hpp"
#include "rng.hpp"

namespace testsupport {

inline colorforest::Raster noise_raster(int width, int height, std::uint64_t seed) {
  colorforest::Raster img(width, height, 1);
  colorforest::SplitMix64 rng(seed);
  auto plane = img.plane(0);
  for (auto& v : plane) v = rng.uniform();
  return img;
}

// Smooth band-limited field in [0, 1]: a few random low-frequency waves.
inline colorforest::Raster smooth_raster(int width, int height, std::uint64_t seed) {
  colorforest::Raster img(width, height, 1);
  colorforest::SplitMix64 rng(seed);
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves(4);
  for (auto& w : waves) {
    w.fx = (rng.uniform() - 0.5) * 0.35;
    w.fy = (rng.uniform() - 0.5) * 0.35;
    w.phase = rng.uniform() * 6.283185307179586;
    w.amp = 0.5 + rng.uniform();
  }
  double lo = 1e300;
  double hi = -1e300;
  auto plane = img.plane(0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double v = 0.0;
      for (const auto& w : waves) v += w.amp * std::sin(w.fx * c + w.fy * r + w.phase);
      plane[static_cast<std::size_t>(r) * width + c] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (auto& v : plane) v = (v - lo) / span;
  return img;
}

// Checks that `labels` is a dense partition 0..count-1 where every id forms
// one 4-connected component. Returns the id count, or -1 on any violation.
inline int check_connected_partition(const std::vector<int>& labels, int width,
                                     int height) {
  const int n = width * height;
  if (static_cast<int>(labels.size()) != n) return -1;
  int count = 0;
  for (int v : labels) {
    if (v < 0) return -1;
    count = std::max(count, v + 1);
  }
  std::vector<int> first(count, -1);
  std::vector<int> sizes(count, 0);
  for (int i = 0; i < n; ++i) {
    if (first[labels[i]] < 0) first[labels[i]] = i;
    ++sizes[labels[i]];
  }
  for (int id = 0; id < count; ++id) {
    if (sizes[id] == 0) return -1;  // not dense
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(first[id]);
    seen[first[id]] = 1;
    int reached = 0;
    while (!q.empty()) {
      const int p = q.front();
      q.pop();
      ++reached;
      const int r = p / width;
      const int c = p % width;
      const int nb[4] = {p - width, p + width, p - 1, p + 1};
      const bool ok[4] = {r > 0, r < height - 1, c > 0, c < width - 1};
      for (int k = 0; k < 4; ++k) {
        if (ok[k] && !seen[nb[k]] && labels[nb[k]] == id) {
          seen[nb[k]] = 1;
          q.push(nb[k]);
        }
      }
    }
    if (reached != sizes[id]) return -1;  // id split into several components
  }
  return count;
}

// Gaussian elimination with partial pivoting; oracle for iterative solvers.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> m,
                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    std::swap(m[col], m[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  return x;
}

// Standard normal via Box-Muller on the deterministic generator.
inline double gaussian(colorforest::SplitMix64& rng) {
  const double u1 = 1.0 - rng.uniform();  // (0, 1]
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace testsupport
