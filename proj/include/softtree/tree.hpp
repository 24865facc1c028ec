#pragma once

#include <functional>
#include <memory>
#include <string>

#include "softtree/dataset.hpp"
#include "softtree/split.hpp"

namespace softtree {

enum class SearchMode { hard, soft };
enum class PropagationMode { hard, soft };

// Weights below this are dropped when views are partitioned.
constexpr double kMinPartitionWeight = 1e-12;

struct TreeNode {
  // Internal nodes: branch rule x[attribute] < threshold goes left.
  int attribute = -1;
  double threshold = 0.0;
  double left_weight = 0.0;   // training weight routed left (missing included)
  double right_weight = 0.0;
  std::unique_ptr<TreeNode> left, right;
  // Leaves: fractional class counts and Laplace-corrected probabilities.
  ClassHistogram histogram;
  std::vector<double> probs;

  bool is_leaf() const { return left == nullptr; }
};

using TreePtr = std::unique_ptr<TreeNode>;

struct GrowStats {
  // Split-gain evaluations per tree depth (index = depth of the node whose
  // split was searched).
  std::vector<std::uint64_t> gain_evals_per_depth;
};

// Optional replacement for the split search at a node (the oversampling
// baseline plugs in here). Arguments: view, node depth, gain-eval counter.
using SplitOverride = std::function<std::optional<SplitCandidate>(
    const WeightedView&, int, std::uint64_t*)>;

struct GrowConfig {
  SearchMode search = SearchMode::hard;
  double u_search = 0.0;        // sigma_j = u_search * mean_j when searching soft
  PropagationMode propagation = PropagationMode::hard;
  double u_propagation = 0.0;   // sigma_j = u_propagation * mean_j when routing soft
  SoftSearchConfig soft;
  double min_branch_weight = 2.0;
  int max_depth = -1;           // negative: unbounded
  double purity = 0.999;        // stop when the majority class reaches this share
  bool quiet = false;           // suppress degenerate-sigma warnings
  SplitOverride split_override; // used by the oversampling baseline
};

// Fraction of an instance's weight that follows the left branch.
// sigma > 0 gives the Gaussian gate Phi((tau - x) / sigma); sigma <= 0 gives
// the indicator of x < tau. A missing x gets the node's training left
// fraction, passed as missing_left_fraction.
double gating_weight(double x, double tau, double sigma,
                     double missing_left_fraction);

struct PartitionResult {
  WeightedView left;
  WeightedView right;
  double left_weight = 0.0;   // totals including the missing-value share
  double right_weight = 0.0;
};

// Splits a view at x[attribute] < threshold. sigma <= 0 routes each known
// value wholly to one side; sigma > 0 routes fractionally through the
// Gaussian gate. Missing values are split by the known-value branch
// proportions in both modes. Weights below kMinPartitionWeight are dropped.
PartitionResult partition(const Dataset& data, const WeightedView& view,
                          int attribute, double threshold, double sigma);

// Per-attribute means of the training data (the scale base for every
// mean-relative sigma).
std::vector<double> attribute_means(const Dataset& data);

// Per-attribute sigma = u * mean, clamped to 0 (with a warning unless quiet)
// where a nonpositive mean would make the scale meaningless.
std::vector<double> sigma_per_attribute(const Dataset& data,
                                        const std::vector<double>& means,
                                        double u, bool quiet,
                                        const char* role);

// Grows a tree on the training data. Recursion stops at class purity, at
// max_depth, when no attribute offers positive gain, or when a child would
// receive less weight than min_branch_weight.
TreePtr grow_tree(const Dataset& train, const GrowConfig& cfg,
                  GrowStats* stats = nullptr);

std::size_t tree_leaf_count(const TreeNode& tree);
std::size_t tree_depth(const TreeNode& tree);
TreePtr clone_tree(const TreeNode& tree);

// Plain-text nested form, one node per line, two-space indentation per level,
// numbers at 9 significant digits. parse(serialize(t)) reproduces the printed
// values exactly, and serializing the parse reproduces the text.
std::string serialize_tree(const TreeNode& tree);
TreePtr parse_tree(const std::string& text);

}  // namespace softtree
