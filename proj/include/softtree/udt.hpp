#pragma once

#include <cstddef>
#include <vector>

#include "softtree/prune.hpp"
#include "softtree/rng.hpp"
#include "softtree/tree.hpp"

namespace softtree {

// Oversampling baseline: during the split search every measurement is
// replaced by s draws from Normal(x, (w * range_j)^2), each carrying 1/s of
// the instance weight, and the plain exhaustive search runs on the expanded
// value list. Nothing else about induction changes.
struct UdtConfig {
  double w = 0.0;  // noise std as a fraction of the attribute's training range
  int s = 100;     // samples per measurement
};

// Expanded (value, weight, class) list for attribute j over a view. range is
// the attribute's full-training-data range. A zero w or a degenerate range
// makes the draws collapse onto the original value, so no randomness is used:
// each value contributes s exact copies of itself at weight/s.
std::vector<ValueSample> udt_oversample(const Dataset& data,
                                        const WeightedView& view,
                                        std::size_t j, double range,
                                        const UdtConfig& cfg, RngStream& rng);

// Split search over oversampled values, attached to GrowConfig.split_override.
// Node visits consume deterministic child streams of `base` in growth order,
// so equal seeds reproduce equal trees.
SplitOverride make_udt_split_override(const Dataset& train,
                                      const UdtConfig& cfg,
                                      const RngStream& base);

// Hard induction plus pruning with the oversampling search plugged in.
TreePtr train_udt(const Dataset& train, const GrowConfig& grow,
                  const PruneConfig& prune, const UdtConfig& cfg,
                  const RngStream& rng, GrowStats* stats = nullptr);

}  // namespace softtree
