#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "features.hpp"

namespace colorforest {

struct SplitCandidate {
  int dim = 0;
  double tau = 0.0;
};

// Pre-order flat tree. A split routes fv[dim] < tau left, >= tau right;
// a leaf carries a probability vector over chroma labels.
struct TreeNode {
  bool is_leaf = false;
  int dim = -1;
  double tau = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> dist;
};

struct Tree {
  std::vector<TreeNode> nodes;  // pre-order, root at 0
};

struct ForestConfig {
  int trees = 1500;
  int dims_per_node = 14;
  int thresholds_per_dim = 13;
  double min_gain = 1e-6;
  int max_depth = 64;
  int min_node = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument on nonsense values
};

struct DecisionForest {
  int classes = 0;
  ForestConfig config;
  std::vector<Tree> trees;
};

struct TrainingSet {
  std::vector<FeatureVector> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Shannon entropy of a count histogram, in bits. Throws when the histogram
// is empty or sums to zero.
double entropy(const std::vector<std::size_t>& counts);

// Information gain of partitioning E by the candidate: parent entropy minus
// the size-weighted entropies of the two sides.
double split_gain(const TrainingSet& set, const SplitCandidate& candidate);

// Thresholds at the `count` equally spaced interior quantiles of a sorted,
// nonempty value list (linear interpolation between order statistics).
std::vector<double> interior_quantiles(const std::vector<double>& sorted_values,
                                       int count);

// Recursive greedy training. Per node, dims_per_node feature dims are drawn
// without replacement and thresholds_per_dim quantile thresholds evaluated
// per dim; the argmax-gain candidate wins, ties to the lexicographically
// smallest (dim, tau). Nodes become leaves when pure, when too small or deep,
// or when no candidate clears min_gain. RNG streams derive from
// cfg.seed ^ tree_index and the node's pre-order position only, so results
// never depend on scheduling.
Tree train_tree(const TrainingSet& set, int classes, const ForestConfig& cfg,
                int tree_index);

// Trains cfg.trees trees, each on a bootstrap resample of `set` (same size)
// when cfg.bootstrap is set. `threads` only distributes independent trees;
// the result is bit-identical for any thread count.
DecisionForest train_forest(const TrainingSet& set, int classes,
                            const ForestConfig& cfg, int threads = 1);

// Mean of the per-tree leaf distributions reached by fv.
std::vector<double> predict(const DecisionForest& forest, const FeatureVector& fv);

// Highest-probability label, ties to the lowest index.
int argmax_label(const std::vector<double>& dist);

}  // namespace colorforest
