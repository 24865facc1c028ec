#pragma once

#include "softtree/rng.hpp"
#include "softtree/tree.hpp"

namespace softtree {

struct PruneConfig {
  double confidence = 0.25;  // c in (0, 1]
  bool enabled = true;
};

// Upper confidence limit for a binomial proportion: the p whose lower-tail
// probability of observing <= errors successes equals confidence/2.
// Fractional errors are rounded half-up before the inversion; errors of 0
// use the closed form 1 - (confidence/2)^(1/n); errors reaching n give 1.
// The general case is found by bisection on the binomial CDF (regularized
// incomplete beta, so fractional n is supported) to 1e-9.
double clopper_pearson_upper(double errors, double n, double confidence);

enum class PruneScenario { keep, leaf, lift };

struct ErrorEstimate {
  double predicted_errors = 0.0;
  PruneScenario scenario = PruneScenario::keep;
};

// Pessimistic error estimate of a subtree over the training view routed to
// it, comparing three scenarios: keep the subtree (sum of leaf estimates),
// collapse it to a leaf (N * upper limit of the majority-complement rate), or
// lift the heavier child subtree in place of the node (re-routing the full
// view through it). Ties prefer the leaf, then the lift.
ErrorEstimate subtree_error_estimate(const Dataset& train,
                                     const TreeNode& node,
                                     const WeightedView& view,
                                     const PruneConfig& cfg,
                                     const GrowConfig& grow);

// Bottom-up error-based pruning of a tree against its training data, routing
// the data with the same propagation mode the tree was grown with. Leaf
// histograms and probabilities are refreshed from the final routing. Returns
// a new tree; the input is untouched.
TreePtr ebp_prune(const Dataset& train, const TreeNode& tree,
                  const PruneConfig& cfg, const GrowConfig& grow);

// Calibrates the pruning confidence so the mean leaf count of 10-fold
// cross-validated trees lands within +-1 of the target. When even minimal
// pruning (c near 1) cannot reach the target, the target falls back to 10 and
// then to 5. Returns the best confidence found within 20 bisection steps.
struct CalibrationResult {
  double confidence = 0.25;
  double mean_leaves = 0.0;
  int target_used = 0;
};
CalibrationResult calibrate_confidence_for_target_leaves(
    const Dataset& data, int target, const GrowConfig& grow, RngStream& rng,
    int folds = 10);

}  // namespace softtree
