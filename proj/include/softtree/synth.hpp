#pragma once

#include <cstddef>
#include <vector>

#include "softtree/dataset.hpp"
#include "softtree/rng.hpp"

namespace softtree {

// Synthetic classification data in the style of the NIPS-2003 feature
// selection challenge generator: class centroids sit on hypercube vertices
// (+-class_sep per informative coordinate), informative features are unit
// Gaussians around the centroid passed through a random rotation, the
// remaining features are pure standard-normal noise, and every feature is
// shifted by a positive constant so mean-relative noise scales stay
// meaningful. Labels are dealt round-robin, so class sizes differ by at most
// one. Deterministic under the stream's seed.
Dataset synth_guyon(std::size_t n_samples, std::size_t n_features,
                    std::size_t n_informative, int n_classes, double class_sep,
                    RngStream& rng);

// The five dataset shapes used by the experiment suite:
// (500x15, 2), (400x15, 2), (300x20, 2), (200x25, 3), (250x20, 3), with
// n_informative = ceil(2/3 * features) and class_sep 1. Names synth1..synth5;
// each dataset gets an independent child stream of `rng`.
struct NamedDataset {
  std::string name;
  Dataset data;
};
std::vector<NamedDataset> synth_suite(const RngStream& rng);

}  // namespace softtree
