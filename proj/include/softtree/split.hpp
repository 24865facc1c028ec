#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "softtree/dataset.hpp"

namespace softtree {

// Grid shape for the smoothed split search. The candidate grid runs from
// (smallest value - window/2 * sigma) to (largest value + window/2 * sigma)
// in steps of step * sigma.
struct SoftSearchConfig {
  double window = 6.0;
  double step = 0.1;
};

struct SplitCandidate {
  int attribute = -1;
  double threshold = 0.0;   // branch rule: x < threshold goes left
  double gain = 0.0;
  double gain_ratio = 0.0;
  double left_weight = 0.0;
  double right_weight = 0.0;
  std::vector<double> left_class;   // per-class weight left of the threshold
  std::vector<double> right_class;
};

// Shannon entropy (bits) of nonnegative fractional counts; zero total -> 0.
double entropy(std::span<const double> counts);

// Weight-averaged entropy of two branches.
double conditional_entropy(std::span<const double> left,
                           std::span<const double> right);

// gain / H(branch split), where H is the entropy of the two branch weights.
// Zero branch entropy -> 0.
double gain_ratio(double gain, double left_weight, double right_weight);

// Exhaustive search over the distinct values: candidates are the 2nd..Dth
// distinct values, maximizing information gain; ties go to the smaller
// threshold. Returns nothing when there are fewer than two distinct values.
// gain_evals, when given, is incremented once per candidate evaluated.
std::optional<SplitCandidate> hard_best_split(
    const std::vector<ValueGroup>& groups, int classes,
    std::uint64_t* gain_evals = nullptr);

// Candidate grid for the smoothed search (see SoftSearchConfig). The first
// point is exactly the lower bound and the exact upper bound is appended when
// the arithmetic progression does not land on it.
std::vector<double> candidate_grid(double value_min, double value_max,
                                   double sigma, const SoftSearchConfig& cfg);

// Mass increments on the candidate grid. Point k carries, per class, the
// kernel-smoothed density mass that enters the left branch when the threshold
// moves to grid[k]: the first point carries the full lower tail, interior
// points carry CDF differences between consecutive grid points, and the last
// point carries the residual, so the increments of every value sum to its
// weight exactly. Contributions are skipped only where the Gaussian CDF
// saturates at double precision, so the sums match direct CDF evaluation.
struct DensityIncrements {
  std::vector<double> total;      // grid-sized
  std::vector<double> per_class;  // grid-major, grid.size() x classes
};
DensityIncrements soft_density_increments(const std::vector<ValueGroup>& groups,
                                          int classes,
                                          const std::vector<double>& grid,
                                          double sigma);

// Smoothed search: running sums over the density increments give the branch
// class densities at every grid point; the gain argmax wins, ties toward the
// smaller threshold. sigma must be positive.
std::optional<SplitCandidate> soft_best_split(
    const std::vector<ValueGroup>& groups, int classes, double sigma,
    const SoftSearchConfig& cfg, std::uint64_t* gain_evals = nullptr);

// Full gain curve of the smoothed search: the same running sums
// soft_best_split walks, recorded at every grid point. Diagnostic surface,
// also used by the consistency checks in the test suite.
struct SoftScan {
  std::vector<double> taus;
  std::vector<double> gains;
  std::vector<double> left_weight;  // running total mass left of tau
  std::vector<double> left_class;   // grid-major, taus.size() x classes
};
SoftScan soft_gain_scan(const std::vector<ValueGroup>& groups, int classes,
                        double sigma, const SoftSearchConfig& cfg);

// Best split across attributes: per attribute the gain argmax (soft search
// where sigma[j] > 0, exhaustive otherwise), compared across attributes by
// gain ratio with ties toward the lower attribute index. Returns nothing when
// no attribute achieves gain above 1e-12.
std::optional<SplitCandidate> best_split_all_attributes(
    const Dataset& data, const WeightedView& view,
    std::span<const double> sigma_per_attribute, const SoftSearchConfig& cfg,
    std::uint64_t* gain_evals = nullptr);

}  // namespace softtree
