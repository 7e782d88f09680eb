#include "superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "errors.hpp"

namespace colorforest {

namespace {

constexpr int kIterations = 10;
constexpr double kCompactness = 0.1;

struct Cluster {
  double intensity = 0.0;
  double row = 0.0;
  double col = 0.0;
};

// Connected components (4-adjacency) of a label image, in row-major discovery
// order. Returns per-pixel component ids and per-component pixel lists.
std::vector<std::vector<int>> label_components(const std::vector<int>& labels,
                                               int width, int height,
                                               std::vector<int>& comp_of) {
  const int n = width * height;
  comp_of.assign(n, -1);
  std::vector<std::vector<int>> comps;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (comp_of[start] >= 0) continue;
    const int comp = static_cast<int>(comps.size());
    comps.emplace_back();
    stack.push_back(start);
    comp_of[start] = comp;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      comps[comp].push_back(p);
      const int r = p / width;
      const int c = p % width;
      const int cand[4] = {r > 0 ? p - width : -1, r + 1 < height ? p + width : -1,
                           c > 0 ? p - 1 : -1, c + 1 < width ? p + 1 : -1};
      for (int q : cand) {
        if (q >= 0 && comp_of[q] < 0 && labels[q] == labels[p]) {
          comp_of[q] = comp;
          stack.push_back(q);
        }
      }
    }
  }
  for (auto& comp : comps) std::ranges::sort(comp);
  return comps;
}

// Keeps the largest component of each label and regrows every remaining
// fragment onto the adjacent label with the strongest final-pixel border.
void enforce_connectivity(std::vector<int>& labels, int width, int height) {
  std::vector<int> comp_of;
  auto comps = label_components(labels, width, height, comp_of);
  const int n = width * height;

  std::map<int, int> kept_for_label;  // label -> component index
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const int label = labels[comps[ci][0]];
    auto it = kept_for_label.find(label);
    if (it == kept_for_label.end() ||
        comps[ci].size() > comps[it->second].size()) {
      kept_for_label[label] = static_cast<int>(ci);
    }
  }

  std::vector<char> finalized(n, 0);
  std::vector<char> comp_done(comps.size(), 0);
  for (auto& [label, ci] : kept_for_label) {
    comp_done[ci] = 1;
    for (int p : comps[ci]) finalized[p] = 1;
  }

  // Orphan fragments attach once they touch finalized territory; the image
  // grid is connected, so every round settles at least one fragment.
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
      if (comp_done[ci]) continue;
      std::map<int, int> border;  // adjacent finalized label -> contact count
      for (int p : comps[ci]) {
        const int r = p / width;
        const int c = p % width;
        const int cand[4] = {r > 0 ? p - width : -1, r + 1 < height ? p + width : -1,
                             c > 0 ? p - 1 : -1, c + 1 < width ? p + 1 : -1};
        for (int q : cand) {
          if (q >= 0 && finalized[q]) border[labels[q]]++;
        }
      }
      if (border.empty()) continue;
      int best_label = -1;
      int best_count = -1;
      for (auto& [label, cnt] : border) {
        if (cnt > best_count) {
          best_count = cnt;
          best_label = label;
        }
      }
      for (int p : comps[ci]) {
        labels[p] = best_label;
        finalized[p] = 1;
      }
      comp_done[ci] = 1;
      progressed = true;
    }
  }
}

void densify(std::vector<int>& labels, int& count) {
  std::vector<int> remap(count, -1);
  int next = 0;
  for (int& l : labels) {
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  count = next;
}

}  // namespace

SuperpixelMap superpixel_map_from_labels(int width, int height,
                                         std::vector<int> labels) {
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("superpixel map: label count does not match shape");
  }
  SuperpixelMap sp;
  sp.width = width;
  sp.height = height;
  sp.labels = std::move(labels);
  int max_id = -1;
  for (int l : sp.labels) {
    if (l < 0) throw InvalidArgument("superpixel map: negative id");
    max_id = std::max(max_id, l);
  }
  sp.count = max_id + 1;
  sp.members.assign(sp.count, {});
  for (int p = 0; p < width * height; ++p) sp.members[sp.labels[p]].push_back(p);
  sp.centroids.assign(sp.count, {0.0, 0.0});
  for (int id = 0; id < sp.count; ++id) {
    if (sp.members[id].empty()) {
      throw InvalidArgument("superpixel map: ids are not dense (id " +
                            std::to_string(id) + " is empty)");
    }
    double row_sum = 0.0;
    double col_sum = 0.0;
    for (int p : sp.members[id]) {
      row_sum += p / width;
      col_sum += p % width;
    }
    const double n = static_cast<double>(sp.members[id].size());
    sp.centroids[id] = {row_sum / n, col_sum / n};
  }
  sp.neighbors.assign(sp.count, {});
  auto link = [&sp](int a, int b) {
    if (a == b) return;
    sp.neighbors[a].push_back(b);
    sp.neighbors[b].push_back(a);
  };
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int p = r * width + c;
      if (c + 1 < width) link(sp.labels[p], sp.labels[p + 1]);
      if (r + 1 < height) link(sp.labels[p], sp.labels[p + width]);
    }
  }
  for (auto& adj : sp.neighbors) {
    std::ranges::sort(adj);
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return sp;
}

SuperpixelMap extract_superpixels(const Raster& gray, int target_size) {
  if (gray.channels() != 1) {
    throw InvalidArgument("extract_superpixels: expected a grayscale raster");
  }
  if (target_size < 1) {
    throw InvalidArgument("extract_superpixels: target size must be positive");
  }
  const int width = gray.width();
  const int height = gray.height();
  auto intensity = gray.plane(0);

  const double spacing = std::sqrt(static_cast<double>(target_size));
  const int grid_rows = std::max(1, static_cast<int>(std::lround(height / spacing)));
  const int grid_cols = std::max(1, static_cast<int>(std::lround(width / spacing)));
  int count = grid_rows * grid_cols;

  std::vector<Cluster> clusters(count);
  for (int gr = 0; gr < grid_rows; ++gr) {
    for (int gc = 0; gc < grid_cols; ++gc) {
      Cluster& cl = clusters[gr * grid_cols + gc];
      cl.row = (gr + 0.5) * height / grid_rows - 0.5;
      cl.col = (gc + 0.5) * width / grid_cols - 0.5;
      const int sr = std::clamp(static_cast<int>(std::lround(cl.row)), 0, height - 1);
      const int sc = std::clamp(static_cast<int>(std::lround(cl.col)), 0, width - 1);
      cl.intensity = intensity[static_cast<std::size_t>(sr) * width + sc];
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(width) * height, -1);
  std::vector<double> best_dist(labels.size());
  const int radius = std::max(2, static_cast<int>(std::ceil(2.0 * spacing)));
  const double norm = 1.0 / (spacing * spacing);

  for (int iter = 0; iter < kIterations; ++iter) {
    std::ranges::fill(best_dist, std::numeric_limits<double>::infinity());
    std::ranges::fill(labels, -1);
    for (int id = 0; id < count; ++id) {
      const Cluster& cl = clusters[id];
      const int r0 = std::max(0, static_cast<int>(std::floor(cl.row)) - radius);
      const int r1 = std::min(height - 1, static_cast<int>(std::ceil(cl.row)) + radius);
      const int c0 = std::max(0, static_cast<int>(std::floor(cl.col)) - radius);
      const int c1 = std::min(width - 1, static_cast<int>(std::ceil(cl.col)) + radius);
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const std::size_t p = static_cast<std::size_t>(r) * width + c;
          const double dv = intensity[p] - cl.intensity;
          const double dr = r - cl.row;
          const double dc = c - cl.col;
          const double d = dv * dv + kCompactness * (dr * dr + dc * dc) * norm;
          if (d < best_dist[p]) {
            best_dist[p] = d;
            labels[p] = id;
          }
        }
      }
    }
    // Pixels outside every search window fall back to the nearest center.
    for (std::size_t p = 0; p < labels.size(); ++p) {
      if (labels[p] >= 0) continue;
      const int r = static_cast<int>(p) / width;
      const int c = static_cast<int>(p) % width;
      double best = std::numeric_limits<double>::infinity();
      for (int id = 0; id < count; ++id) {
        const double dr = r - clusters[id].row;
        const double dc = c - clusters[id].col;
        const double d = dr * dr + dc * dc;
        if (d < best) {
          best = d;
          labels[p] = id;
        }
      }
    }

    std::vector<double> sum_v(count, 0.0), sum_r(count, 0.0), sum_c(count, 0.0);
    std::vector<int> sizes(count, 0);
    for (std::size_t p = 0; p < labels.size(); ++p) {
      const int id = labels[p];
      sum_v[id] += intensity[p];
      sum_r[id] += static_cast<int>(p) / width;
      sum_c[id] += static_cast<int>(p) % width;
      sizes[id]++;
    }
    for (int id = 0; id < count; ++id) {
      if (sizes[id] == 0) continue;  // dead cluster keeps its old center
      clusters[id].intensity = sum_v[id] / sizes[id];
      clusters[id].row = sum_r[id] / sizes[id];
      clusters[id].col = sum_c[id] / sizes[id];
    }
  }

  densify(labels, count);
  enforce_connectivity(labels, width, height);
  int final_count = count;
  densify(labels, final_count);
  return superpixel_map_from_labels(width, height, std::move(labels));
}

int centroid_pixel(const SuperpixelMap& sp, int id) {
  if (id < 0 || id >= sp.count) {
    throw InvalidArgument("centroid_pixel: superpixel id " + std::to_string(id) +
                          " out of range");
  }
  const auto [cr, cc] = sp.centroids[id];
  int best_pixel = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int p : sp.members[id]) {
    const double dr = p / sp.width - cr;
    const double dc = p % sp.width - cc;
    const double d = dr * dr + dc * dc;
    if (d < best) {  // members ascend, so ties keep the smaller index
      best = d;
      best_pixel = p;
    }
  }
  return best_pixel;
}

}  // namespace colorforest
