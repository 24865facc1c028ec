#pragma once

#include <span>
#include <vector>

#include "softtree/tree.hpp"

namespace softtree {

// Evaluation-time configuration. Soft mode gates every branch through
// Phi((tau - x) / sigma_j) with sigma_j = u_eval * mean_j, where the means
// are frozen training-set attribute means (carried by the model, so
// evaluation needs no training data). u_eval = 0 reproduces hard evaluation
// exactly.
struct EvalConfig {
  PropagationMode mode = PropagationMode::hard;
  double u_eval = 0.0;
  std::vector<double> means;
};

// Class-probability vector for one instance (nonnegative, sums to 1).
// Hard mode follows the branch rule; missing attributes mix both children by
// their training weights; soft mode mixes by the Gaussian gate.
std::vector<double> predict_proba(const TreeNode& tree,
                                  std::span<const double> x,
                                  const EvalConfig& cfg);

// Argmax of predict_proba; ties resolve to the smaller class id.
int classify(const TreeNode& tree, std::span<const double> x,
             const EvalConfig& cfg);

// Fraction of rows whose predicted class equals the label.
double accuracy(const TreeNode& tree, const Dataset& data,
                const EvalConfig& cfg);

}  // namespace softtree
