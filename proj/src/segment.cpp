#include "segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace colorforest {

namespace {

constexpr int kMaxShiftIterations = 100;
constexpr double kShiftEpsilon = 0.01;

// Per-pixel converged mode intensity on the 0..255 scale. Flat kernels: the
// mean is taken over sample points inside the spatial disc and range window
// around the current estimate.
std::vector<double> shift_modes(const Raster& gray, double spatial_bw,
                                double range_bw) {
  const int h = gray.height();
  const int w = gray.width();
  std::vector<double> modes(static_cast<std::size_t>(h) * w);
  const double spatial_sq = spatial_bw * spatial_bw;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double zx = c;
      double zy = r;
      double zv = gray.at(0, r, c) * 255.0;
      for (int iter = 0; iter < kMaxShiftIterations; ++iter) {
        const int y0 = std::max(static_cast<int>(std::ceil(zy - spatial_bw)), 0);
        const int y1 = std::min(static_cast<int>(std::floor(zy + spatial_bw)), h - 1);
        const int x0 = std::max(static_cast<int>(std::ceil(zx - spatial_bw)), 0);
        const int x1 = std::min(static_cast<int>(std::floor(zx + spatial_bw)), w - 1);
        double sx = 0.0, sy = 0.0, sv = 0.0;
        int count = 0;
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            const double dx = x - zx;
            const double dy = y - zy;
            if (dx * dx + dy * dy > spatial_sq) continue;
            const double v = gray.at(0, y, x) * 255.0;
            if (std::abs(v - zv) > range_bw) continue;
            sx += x;
            sy += y;
            sv += v;
            ++count;
          }
        }
        if (count == 0) break;
        const double nx = sx / count;
        const double ny = sy / count;
        const double nv = sv / count;
        const double shift = std::sqrt((nx - zx) * (nx - zx) + (ny - zy) * (ny - zy) +
                                       (nv - zv) * (nv - zv));
        zx = nx;
        zy = ny;
        zv = nv;
        if (shift < kShiftEpsilon) break;
      }
      modes[static_cast<std::size_t>(r) * w + c] = zv;
    }
  }
  return modes;
}

// 4-connected components of pixels whose modes differ by at most range_bw,
// labeled in row-major discovery order.
std::pair<std::vector<int>, int> group_modes(const std::vector<double>& modes,
                                             int w, int h, double range_bw) {
  const std::size_t n = modes.size();
  std::vector<int> labels(n, -1);
  std::vector<std::size_t> stack;
  int next = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (labels[start] != -1) continue;
    labels[start] = next;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int r = static_cast<int>(p) / w;
      const int c = static_cast<int>(p) % w;
      const int dr[4] = {-1, 1, 0, 0};
      const int dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int nr = r + dr[k];
        const int nc = c + dc[k];
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        const std::size_t q = static_cast<std::size_t>(nr) * w + nc;
        if (labels[q] != -1) continue;
        if (std::abs(modes[p] - modes[q]) > range_bw) continue;
        labels[q] = next;
        stack.push_back(q);
      }
    }
    ++next;
  }
  return {std::move(labels), next};
}

std::vector<int> densify(std::vector<int> labels, int upper_bound) {
  std::vector<int> remap(upper_bound, -1);
  int next = 0;
  for (int& l : labels) {
    if (remap[l] == -1) remap[l] = next++;
    l = remap[l];
  }
  return labels;
}

Segmentation finalize(int width, int height, std::vector<int> labels) {
  Segmentation seg;
  seg.width = width;
  seg.height = height;
  seg.seg_labels = std::move(labels);
  seg.count = *std::max_element(seg.seg_labels.begin(), seg.seg_labels.end()) + 1;
  seg.sizes.assign(seg.count, 0);
  for (int l : seg.seg_labels) ++seg.sizes[l];
  return seg;
}

}  // namespace

Segmentation meanshift_segment(const Raster& gray, double spatial_bw,
                               double range_bw, int min_region) {
  if (gray.channels() != 1 || gray.width() <= 0 || gray.height() <= 0) {
    throw InvalidArgument("meanshift_segment: expected a non-empty single-channel raster");
  }
  if (!(spatial_bw > 0.0) || !(range_bw > 0.0)) {
    throw InvalidArgument("meanshift_segment: bandwidths must be positive");
  }
  if (min_region < 0) {
    throw InvalidArgument("meanshift_segment: min_region must be non-negative");
  }
  const int h = gray.height();
  const int w = gray.width();

  const std::vector<double> modes = shift_modes(gray, spatial_bw, range_bw);
  auto [labels, region_count] = group_modes(modes, w, h, range_bw);

  // Absorb undersized regions into the adjacent region with the closest mean
  // mode intensity, smallest region first (ties to the lower id).
  std::vector<std::size_t> size(region_count, 0);
  std::vector<double> mode_sum(region_count, 0.0);
  std::vector<std::set<int>> adj(region_count);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * w + c;
      const int l = labels[p];
      ++size[l];
      mode_sum[l] += modes[p];
      if (c + 1 < w && labels[p + 1] != l) {
        adj[l].insert(labels[p + 1]);
        adj[labels[p + 1]].insert(l);
      }
      if (r + 1 < h && labels[p + w] != l) {
        adj[l].insert(labels[p + w]);
        adj[labels[p + w]].insert(l);
      }
    }
  }

  std::vector<int> parent(region_count);
  for (int i = 0; i < region_count; ++i) parent[i] = i;
  auto find = [&parent](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<bool> alive(region_count, true);
  std::vector<bool> stuck(region_count, false);  // no neighbor to merge into

  for (;;) {
    int pick = -1;
    for (int i = 0; i < region_count; ++i) {
      if (!alive[i] || stuck[i]) continue;
      if (size[i] >= static_cast<std::size_t>(min_region)) continue;
      if (pick == -1 || size[i] < size[pick]) pick = i;
    }
    if (pick == -1) break;
    if (adj[pick].empty()) {
      stuck[pick] = true;
      continue;
    }
    const double pick_mean = mode_sum[pick] / static_cast<double>(size[pick]);
    int target = -1;
    double best_diff = std::numeric_limits<double>::infinity();
    for (int nb : adj[pick]) {
      const double diff =
          std::abs(mode_sum[nb] / static_cast<double>(size[nb]) - pick_mean);
      if (diff < best_diff) {
        best_diff = diff;
        target = nb;
      }
    }
    // Fold pick into target and rewire the adjacency around it.
    parent[pick] = target;
    alive[pick] = false;
    size[target] += size[pick];
    mode_sum[target] += mode_sum[pick];
    adj[target].erase(pick);
    for (int nb : adj[pick]) {
      if (nb == target) continue;
      adj[nb].erase(pick);
      adj[nb].insert(target);
      adj[target].insert(nb);
    }
    adj[pick].clear();
  }

  for (int& l : labels) l = find(l);
  return finalize(w, h, densify(std::move(labels), region_count));
}

Segmentation apply_merge_map(const Segmentation& seg,
                             const std::vector<std::pair<int, int>>& merges) {
  std::vector<int> parent(seg.count);
  for (int i = 0; i < seg.count; ++i) parent[i] = i;
  auto find = [&parent](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : merges) {
    if (a < 0 || a >= seg.count || b < 0 || b >= seg.count) {
      throw InvalidArgument("merge map: pair (" + std::to_string(a) + ", " +
                            std::to_string(b) + ") references an unknown segment; " +
                            std::to_string(seg.count) + " segments exist");
    }
    const int ra = find(a);
    const int rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> labels(seg.seg_labels);
  for (int& l : labels) l = find(l);
  return finalize(seg.width, seg.height, densify(std::move(labels), seg.count));
}

std::vector<std::pair<int, int>> parse_merge_map(std::istream& in) {
  std::vector<std::pair<int, int>> merges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream fields(line);
    int a = 0, b = 0;
    std::string trailing;
    if (!(fields >> a >> b) || (fields >> trailing)) {
      throw InvalidArgument("merge map line " + std::to_string(line_no) +
                            ": expected '<segment_id> <segment_id>'");
    }
    merges.emplace_back(a, b);
  }
  return merges;
}

std::vector<int> vote_refine(const std::vector<int>& labels,
                             const SuperpixelMap& sp, const Segmentation& seg) {
  if (static_cast<int>(labels.size()) != sp.count) {
    throw InvalidArgument("vote_refine: label count does not match superpixel count");
  }
  if (seg.width != sp.width || seg.height != sp.height) {
    throw InvalidArgument("vote_refine: segmentation shape does not match superpixels");
  }

  // Superpixel -> segment holding the majority of its pixels (ties -> lower
  // segment id; std::map iterates ascending so strict > implements that).
  std::vector<std::vector<int>> segment_sps(seg.count);
  for (int id = 0; id < sp.count; ++id) {
    std::map<int, int> overlap;
    for (int px : sp.members[id]) ++overlap[seg.seg_labels[px]];
    int best_seg = -1;
    int best_count = 0;
    for (const auto& [s, n] : overlap) {
      if (n > best_count) {
        best_count = n;
        best_seg = s;
      }
    }
    segment_sps[best_seg].push_back(id);
  }

  std::vector<int> out(labels);
  for (int s = 0; s < seg.count; ++s) {
    const std::vector<int>& members = segment_sps[s];
    if (members.size() < 3) continue;
    std::map<int, int> votes;
    for (int id : members) ++votes[labels[id]];
    int best_label = -1;
    int best_count = 0;
    bool tied = false;
    for (const auto& [l, n] : votes) {
      if (n > best_count) {
        best_count = n;
        best_label = l;
        tied = false;
      } else if (n == best_count) {
        tied = true;
      }
    }
    if (tied) continue;
    for (int id : members) out[id] = best_label;
  }
  return out;
}

}  // namespace colorforest
