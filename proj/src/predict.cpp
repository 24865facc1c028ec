#include "softtree/predict.hpp"

namespace softtree {

namespace {

void accumulate(const TreeNode& node, std::span<const double> x,
                const EvalConfig& cfg, double weight,
                std::vector<double>& out) {
  if (node.is_leaf()) {
    for (std::size_t y = 0; y < out.size(); ++y)
      out[y] += weight * node.probs[y];
    return;
  }
  double sigma = 0.0;
  if (cfg.mode == PropagationMode::soft && cfg.u_eval > 0.0) {
    double mean = node.attribute < static_cast<int>(cfg.means.size())
                      ? cfg.means[node.attribute]
                      : 0.0;
    if (mean > 0.0) sigma = cfg.u_eval * mean;
  }
  double wl = node.left_weight, wr = node.right_weight;
  double miss = (wl + wr) > 0 ? wl / (wl + wr) : 0.5;
  double g = gating_weight(x[node.attribute], node.threshold, sigma, miss);
  if (g > 0.0) accumulate(*node.left, x, cfg, weight * g, out);
  if (g < 1.0) accumulate(*node.right, x, cfg, weight * (1.0 - g), out);
}

}  // namespace

std::vector<double> predict_proba(const TreeNode& tree,
                                  std::span<const double> x,
                                  const EvalConfig& cfg) {
  const TreeNode* probe = &tree;
  while (!probe->is_leaf()) probe = probe->left.get();
  std::vector<double> out(probe->probs.size(), 0.0);
  accumulate(tree, x, cfg, 1.0, out);
  return out;
}

int classify(const TreeNode& tree, std::span<const double> x,
             const EvalConfig& cfg) {
  std::vector<double> p = predict_proba(tree, x, cfg);
  int best = 0;
  for (int y = 1; y < static_cast<int>(p.size()); ++y)
    if (p[y] > p[best]) best = y;
  return best;
}

double accuracy(const TreeNode& tree, const Dataset& data,
                const EvalConfig& cfg) {
  if (data.rows() == 0) return 0.0;
  std::size_t correct = 0;
  std::vector<double> row(data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) row[j] = data.at(i, j);
    if (classify(tree, row, cfg) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

}  // namespace softtree
