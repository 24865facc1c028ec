#include "softtree/prune.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "softtree/stats.hpp"

namespace softtree {

double clopper_pearson_upper(double errors, double n, double confidence) {
  if (!(n > 0)) throw std::runtime_error("upper limit needs n > 0");
  if (errors < 0 || errors > n)
    throw std::runtime_error("errors must lie in [0, n]");
  if (!(confidence > 0) || confidence > 1)
    throw std::runtime_error("confidence must lie in (0, 1]");
  const double half = 0.5 * confidence;
  const double k = std::floor(errors + 0.5);
  if (k >= n) return 1.0;
  if (k == 0) return -std::expm1(std::log(half) / n);
  // CDF(k; n, p) falls from 1 to 0 as p rises; bisect to the c/2 crossing.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    if (binomial_cdf(k, n, mid) > half)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct PruneContext {
  const Dataset& data;
  const PruneConfig& cfg;
  std::vector<double> sigma_prop;
};

double leaf_error_estimate(const PruneContext& ctx, const ClassHistogram& hist) {
  double n = hist.total();
  if (n <= 0) return 0.0;
  double errors = n - hist.counts[hist.majority()];
  return n * clopper_pearson_upper(errors, n, ctx.cfg.confidence);
}

TreePtr refit_leaf(const PruneContext& ctx, const ClassHistogram& hist) {
  auto node = std::make_unique<TreeNode>();
  node->histogram = hist;
  int k = ctx.data.class_count();
  double total = hist.total();
  node->probs.resize(k);
  for (int y = 0; y < k; ++y)
    node->probs[y] = (hist.counts[y] + 1.0) / (total + k);
  return node;
}

struct PruneOutcome {
  TreePtr tree;
  double estimate = 0.0;
  PruneScenario scenario = PruneScenario::keep;
};

PruneOutcome prune_rec(const PruneContext& ctx, const TreeNode& node,
                       const WeightedView& view) {
  ClassHistogram hist(ctx.data.class_count());
  for (const auto& e : view) hist.add(ctx.data.labels[e.row], e.weight);

  if (node.is_leaf())
    return {refit_leaf(ctx, hist), leaf_error_estimate(ctx, hist),
            PruneScenario::keep};

  PartitionResult part = partition(ctx.data, view, node.attribute,
                                   node.threshold,
                                   ctx.sigma_prop[node.attribute]);
  PruneOutcome left = prune_rec(ctx, *node.left, part.left);
  PruneOutcome right = prune_rec(ctx, *node.right, part.right);
  double keep_est = left.estimate + right.estimate;
  double leaf_est = leaf_error_estimate(ctx, hist);

  // Lifting replaces this node by its heavier child, re-routed and re-pruned
  // against this node's full view. A leaf child would reduce to the leaf
  // scenario, so only subtree children are considered.
  const TreeNode* heavy =
      part.left_weight >= part.right_weight ? left.tree.get() : right.tree.get();
  PruneOutcome lifted;
  double lift_est = std::numeric_limits<double>::infinity();
  if (!heavy->is_leaf()) {
    lifted = prune_rec(ctx, *heavy, view);
    lift_est = lifted.estimate;
  }

  if (leaf_est <= keep_est && leaf_est <= lift_est)
    return {refit_leaf(ctx, hist), leaf_est, PruneScenario::leaf};
  if (lift_est < keep_est)
    return {std::move(lifted.tree), lift_est, PruneScenario::lift};

  auto kept = std::make_unique<TreeNode>();
  kept->attribute = node.attribute;
  kept->threshold = node.threshold;
  kept->left_weight = part.left_weight;
  kept->right_weight = part.right_weight;
  kept->left = std::move(left.tree);
  kept->right = std::move(right.tree);
  return {std::move(kept), keep_est, PruneScenario::keep};
}

PruneContext make_context(const Dataset& train, const PruneConfig& cfg,
                          const GrowConfig& grow) {
  PruneContext ctx{train, cfg, {}};
  std::vector<double> means = attribute_means(train);
  ctx.sigma_prop = sigma_per_attribute(
      train, means,
      grow.propagation == PropagationMode::soft ? grow.u_propagation : 0.0,
      true, "propagation");
  return ctx;
}

}  // namespace

ErrorEstimate subtree_error_estimate(const Dataset& train,
                                     const TreeNode& node,
                                     const WeightedView& view,
                                     const PruneConfig& cfg,
                                     const GrowConfig& grow) {
  PruneContext ctx = make_context(train, cfg, grow);
  PruneOutcome out = prune_rec(ctx, node, view);
  return {out.estimate, out.scenario};
}

TreePtr ebp_prune(const Dataset& train, const TreeNode& tree,
                  const PruneConfig& cfg, const GrowConfig& grow) {
  if (!cfg.enabled) return clone_tree(tree);
  PruneContext ctx = make_context(train, cfg, grow);
  return prune_rec(ctx, tree, full_view(train)).tree;
}

CalibrationResult calibrate_confidence_for_target_leaves(
    const Dataset& data, int target, const GrowConfig& grow, RngStream& rng,
    int folds) {
  std::vector<int> fold_of = stratified_folds(data, folds, rng);
  // Growth does not depend on the confidence, so the fold trees are grown
  // once and only re-pruned per bisection step.
  std::vector<Dataset> trains;
  std::vector<TreePtr> trees;
  for (int f = 0; f < folds; ++f) {
    trains.push_back(fold_split(data, fold_of, f).train);
    trees.push_back(grow_tree(trains.back(), grow));
  }
  auto mean_leaves = [&](double c) {
    PruneConfig pc{c, true};
    double sum = 0;
    for (int f = 0; f < folds; ++f)
      sum += static_cast<double>(
          tree_leaf_count(*ebp_prune(trains[f], *trees[f], pc, grow)));
    return sum / folds;
  };

  const double lo_c = 1e-4, hi_c = 0.9999;
  double achievable = mean_leaves(hi_c);
  int used = target;
  if (achievable < used && used > 10) used = 10;
  if (achievable < used && used > 5) used = 5;

  double lo = lo_c, hi = hi_c;
  CalibrationResult best{hi_c, achievable, used};
  double best_err = std::fabs(achievable - used);
  for (int it = 0; it < 20; ++it) {
    double mid = 0.5 * (lo + hi);
    double m = mean_leaves(mid);
    double err = std::fabs(m - used);
    if (err < best_err) {
      best = {mid, m, used};
      best_err = err;
    }
    if (err <= 1.0) break;
    if (m < used)
      lo = mid;
    else
      hi = mid;
  }
  return best;
}

}  // namespace softtree
