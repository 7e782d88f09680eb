#include "forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "errors.hpp"
#include "rng.hpp"

namespace colorforest {

namespace {

double entropy_bits(const std::vector<int>& counts, int total) {
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

struct TreeBuilder {
  const TrainingSet& set;
  const ForestConfig& cfg;
  int classes;
  std::uint64_t base;  // cfg.seed ^ tree_index
  std::uint64_t next_stream = 1;  // stream 0 belongs to the bootstrap draw
  std::vector<TreeNode> nodes;

  int build(const std::vector<int>& idx, int depth) {
    const int me = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const std::uint64_t stream = next_stream++;

    const int n = static_cast<int>(idx.size());
    std::vector<int> counts(classes, 0);
    for (int i : idx) ++counts[set.labels[i]];
    const bool pure = *std::max_element(counts.begin(), counts.end()) == n;

    // A node one level short of max_depth may not split, so no path ever
    // tests max_depth comparisons.
    if (pure || n < cfg.min_node || depth + 1 >= cfg.max_depth) {
      return make_leaf(me, counts, n);
    }

    SplitMix64 rng(derive_seed(base, stream));
    std::vector<int> pool(kFeatureDim);
    for (int d = 0; d < kFeatureDim; ++d) pool[d] = d;
    const int dims = std::min(cfg.dims_per_node, kFeatureDim);
    for (int j = 0; j < dims; ++j) {
      const int swap_with =
          j + static_cast<int>(rng.below(static_cast<std::uint64_t>(kFeatureDim - j)));
      std::swap(pool[j], pool[swap_with]);
    }

    const double parent_h = entropy_bits(counts, n);
    double best_gain = -1.0;
    int best_dim = -1;
    double best_tau = 0.0;

    std::vector<std::pair<double, int>> ordered(n);  // (value, label) by value
    std::vector<int> left_counts(classes);
    for (int j = 0; j < dims; ++j) {
      const int dim = pool[j];
      for (int i = 0; i < n; ++i) {
        ordered[i] = {set.features[idx[i]][dim], set.labels[idx[i]]};
      }
      std::sort(ordered.begin(), ordered.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (ordered.front().first == ordered.back().first) continue;

      std::vector<double> values(n);
      for (int i = 0; i < n; ++i) values[i] = ordered[i].first;
      const std::vector<double> taus =
          interior_quantiles(values, cfg.thresholds_per_dim);

      // taus ascend, so the strict-< left side grows monotonically.
      std::fill(left_counts.begin(), left_counts.end(), 0);
      int nl = 0;
      for (const double tau : taus) {
        while (nl < n && ordered[nl].first < tau) {
          ++left_counts[ordered[nl].second];
          ++nl;
        }
        const int nr = n - nl;
        double weighted = 0.0;
        if (nl > 0) weighted += nl * entropy_bits(left_counts, nl);
        if (nr > 0) {
          std::vector<int> right_counts(classes);
          for (int c = 0; c < classes; ++c) right_counts[c] = counts[c] - left_counts[c];
          weighted += nr * entropy_bits(right_counts, nr);
        }
        // Non-negative in exact arithmetic; clamp the last-bit noise away so
        // downstream comparisons can trust the sign.
        const double gain = std::max(parent_h - weighted / n, 0.0);
        const bool better =
            gain > best_gain ||
            (gain == best_gain &&
             (dim < best_dim || (dim == best_dim && tau < best_tau)));
        if (better) {
          best_gain = gain;
          best_dim = dim;
          best_tau = tau;
        }
      }
    }

    // Zero gain means no candidate separates anything; recursing would not
    // terminate, so it leafs out even when min_gain is 0.
    if (best_gain <= 0.0 || best_gain < cfg.min_gain) {
      return make_leaf(me, counts, n);
    }

    std::vector<int> left_idx;
    std::vector<int> right_idx;
    for (int i : idx) {
      (set.features[i][best_dim] < best_tau ? left_idx : right_idx).push_back(i);
    }
    nodes[me].dim = best_dim;
    nodes[me].tau = best_tau;
    nodes[me].left = build(left_idx, depth + 1);
    nodes[me].right = build(right_idx, depth + 1);
    return me;
  }

  int make_leaf(int me, const std::vector<int>& counts, int n) {
    nodes[me].is_leaf = true;
    nodes[me].dist.resize(classes);
    for (int c = 0; c < classes; ++c) {
      nodes[me].dist[c] = static_cast<double>(counts[c]) / n;
    }
    return me;
  }
};

void require_examples(const TrainingSet& set, int classes, const char* who) {
  if (set.size() == 0) {
    throw InvalidArgument(std::string(who) + ": empty training set");
  }
  if (set.features.size() != set.labels.size()) {
    throw InvalidArgument(std::string(who) + ": feature/label size mismatch");
  }
  if (classes <= 0) {
    throw InvalidArgument(std::string(who) + ": class count must be positive");
  }
  for (int l : set.labels) {
    if (l < 0 || l >= classes) {
      throw InvalidArgument(std::string(who) + ": label " + std::to_string(l) +
                            " outside 0.." + std::to_string(classes - 1));
    }
  }
}

}  // namespace

void ForestConfig::validate() const {
  if (trees < 1) throw InvalidArgument("forest config: trees must be >= 1");
  if (dims_per_node < 1) {
    throw InvalidArgument("forest config: dims_per_node must be >= 1");
  }
  if (thresholds_per_dim < 1) {
    throw InvalidArgument("forest config: thresholds_per_dim must be >= 1");
  }
  if (!(min_gain >= 0.0)) {
    throw InvalidArgument("forest config: min_gain must be >= 0");
  }
  if (max_depth < 1) throw InvalidArgument("forest config: max_depth must be >= 1");
  if (min_node < 1) throw InvalidArgument("forest config: min_node must be >= 1");
}

double entropy(const std::vector<std::size_t>& counts) {
  if (counts.empty()) throw InvalidArgument("entropy: empty histogram");
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw InvalidArgument("entropy: zero total count");
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double split_gain(const TrainingSet& set, const SplitCandidate& candidate) {
  if (set.size() == 0) throw InvalidArgument("split_gain: empty training set");
  if (candidate.dim < 0 || candidate.dim >= kFeatureDim) {
    throw InvalidArgument("split_gain: feature dimension out of range");
  }
  int classes = 0;
  for (int l : set.labels) classes = std::max(classes, l + 1);

  const int n = static_cast<int>(set.size());
  std::vector<int> parent(classes, 0);
  std::vector<int> left(classes, 0);
  int nl = 0;
  for (int i = 0; i < n; ++i) {
    ++parent[set.labels[i]];
    if (set.features[i][candidate.dim] < candidate.tau) {
      ++left[set.labels[i]];
      ++nl;
    }
  }
  const int nr = n - nl;
  std::vector<int> right(classes);
  for (int c = 0; c < classes; ++c) right[c] = parent[c] - left[c];

  double weighted = 0.0;
  if (nl > 0) weighted += nl * entropy_bits(left, nl);
  if (nr > 0) weighted += nr * entropy_bits(right, nr);
  return std::max(entropy_bits(parent, n) - weighted / n, 0.0);
}

std::vector<double> interior_quantiles(const std::vector<double>& sorted_values,
                                       int count) {
  if (sorted_values.empty()) {
    throw InvalidArgument("interior_quantiles: empty value list");
  }
  if (count < 1) throw InvalidArgument("interior_quantiles: count must be >= 1");
  const int m = static_cast<int>(sorted_values.size());
  std::vector<double> out(count);
  for (int j = 1; j <= count; ++j) {
    const double pos = (static_cast<double>(j) / (count + 1)) * (m - 1);
    const int lo = static_cast<int>(pos);
    const double frac = pos - lo;
    out[j - 1] = (lo + 1 < m)
                     ? sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])
                     : sorted_values[lo];
  }
  return out;
}

Tree train_tree(const TrainingSet& set, int classes, const ForestConfig& cfg,
                int tree_index) {
  require_examples(set, classes, "train_tree");
  cfg.validate();
  TreeBuilder builder{set, cfg, classes,
                      cfg.seed ^ static_cast<std::uint64_t>(tree_index)};
  std::vector<int> all(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) all[i] = static_cast<int>(i);
  builder.build(all, 0);
  Tree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

DecisionForest train_forest(const TrainingSet& set, int classes,
                            const ForestConfig& cfg, int threads) {
  require_examples(set, classes, "train_forest");
  cfg.validate();
  if (threads < 1) throw InvalidArgument("train_forest: threads must be >= 1");

  DecisionForest forest;
  forest.classes = classes;
  forest.config = cfg;
  forest.trees.resize(cfg.trees);

  const std::size_t n = set.size();
  auto train_one = [&](int t) {
    if (cfg.bootstrap) {
      SplitMix64 rng(derive_seed(cfg.seed ^ static_cast<std::uint64_t>(t), 0));
      TrainingSet resampled;
      resampled.features.reserve(n);
      resampled.labels.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = rng.below(n);
        resampled.features.push_back(set.features[i]);
        resampled.labels.push_back(set.labels[i]);
      }
      forest.trees[t] = train_tree(resampled, classes, cfg, t);
    } else {
      forest.trees[t] = train_tree(set, classes, cfg, t);
    }
  };

  const int workers = std::min(threads, cfg.trees);
  if (workers == 1) {
    for (int t = 0; t < cfg.trees; ++t) train_one(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < cfg.trees; t = next.fetch_add(1)) {
          train_one(t);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }
  return forest;
}

std::vector<double> predict(const DecisionForest& forest, const FeatureVector& fv) {
  if (forest.trees.empty() || forest.classes <= 0) {
    throw InvalidArgument("predict: forest is empty");
  }
  std::vector<double> dist(forest.classes, 0.0);
  for (const Tree& tree : forest.trees) {
    int at = 0;
    while (!tree.nodes[at].is_leaf) {
      const TreeNode& node = tree.nodes[at];
      at = fv[node.dim] < node.tau ? node.left : node.right;
    }
    const std::vector<double>& leaf = tree.nodes[at].dist;
    for (int c = 0; c < forest.classes; ++c) dist[c] += leaf[c];
  }
  const double inv = 1.0 / static_cast<double>(forest.trees.size());
  for (double& p : dist) p *= inv;
  return dist;
}

int argmax_label(const std::vector<double>& dist) {
  if (dist.empty()) throw InvalidArgument("argmax_label: empty distribution");
  int best = 0;
  for (int c = 1; c < static_cast<int>(dist.size()); ++c) {
    if (dist[c] > dist[best]) best = c;
  }
  return best;
}

}  // namespace colorforest
