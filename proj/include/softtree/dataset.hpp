#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "softtree/rng.hpp"

namespace softtree {

struct AttributeMeta {
  std::string name;
  int index = 0;
};

// Numeric table with integer class labels. Missing cells are stored as NaN.
class Dataset {
 public:
  std::vector<AttributeMeta> attributes;
  std::vector<double> values;       // row-major, rows() x attributes.size()
  std::vector<int> labels;          // class ids, dense 0..class_count-1
  std::vector<std::string> class_names;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return attributes.size(); }
  int class_count() const { return static_cast<int>(class_names.size()); }

  double at(std::size_t row, std::size_t col) const {
    return values[row * cols() + col];
  }
  double& at(std::size_t row, std::size_t col) {
    return values[row * cols() + col];
  }
  static bool missing(double v) { return std::isnan(v); }
};

// Fractional-weight view over dataset rows. Weights are positive; a row may
// appear in several nodes' views with weights that sum to its original weight.
struct WeightedRow {
  std::size_t row;
  double weight;
};
using WeightedView = std::vector<WeightedRow>;

// Per-class fractional counts.
struct ClassHistogram {
  std::vector<double> counts;

  explicit ClassHistogram(int classes = 0) : counts(classes, 0.0) {}
  void add(int cls, double w) { counts[cls] += w; }
  double total() const {
    long double t = 0;
    for (double c : counts) t += c;
    return static_cast<double>(t);
  }
  // Majority class; ties resolved toward the smaller class id.
  int majority() const {
    int best = 0;
    for (int k = 1; k < static_cast<int>(counts.size()); ++k)
      if (counts[k] > counts[best]) best = k;
    return best;
  }
};

// Whole-dataset view with unit weights.
WeightedView full_view(const Dataset& data);

// Weight of a view (long double accumulation).
double view_weight(const WeightedView& view);

// Class histogram of a view.
ClassHistogram view_histogram(const Dataset& data, const WeightedView& view);

// ---- CSV ----
// Header row required. Label column selected by name; every other column must
// be numeric. "?" marks a missing cell. Class ids are assigned by first
// appearance. Throws std::runtime_error with file/line context on bad input.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Writes a dataset back out (attributes in order, label last). Values are
// printed with 9 significant digits; missing cells as "?".
void save_csv(const Dataset& data, const std::string& path,
              const std::string& label_column);

// ---- Sampling and per-attribute helpers ----

// Stratified two-way split. Per class, round(train_fraction * count) rows go
// to train (clamped so both sides keep at least one row of every class).
// Throws if any class has fewer than 2 rows.
struct SplitPair {
  Dataset train;
  Dataset test;
};
SplitPair stratified_split(const Dataset& data, double train_fraction,
                           RngStream& rng);

// Stratified K folds; returns fold index per row. Per class, shuffled rows are
// dealt round-robin, so fold sizes differ by at most one per class. Throws if
// any class has fewer rows than folds.
std::vector<int> stratified_folds(const Dataset& data, int folds,
                                  RngStream& rng);

// Materialize train/validation datasets for one fold.
SplitPair fold_split(const Dataset& data, const std::vector<int>& fold_of,
                     int fold);

// Mean of the non-missing values of attribute j. Throws if all missing.
double attribute_mean(const Dataset& data, std::size_t j);

// Max minus min of the non-missing values of attribute j.
double attribute_range(const Dataset& data, std::size_t j);

// Adds zero-mean Gaussian noise, std = factor * column mean, independently to
// every non-missing cell. factor 0 returns the input unchanged (no draws).
// Labels untouched. Throws on negative factor.
Dataset add_gaussian_noise(const Dataset& data, double factor, RngStream& rng);

// One attribute's sorted distinct values over a view, with total and
// per-class weights merged across duplicates. Missing cells are skipped.
struct ValueGroup {
  double value;
  double weight;
  std::vector<double> class_weights;
};
std::vector<ValueGroup> sorted_distinct_values(const Dataset& data,
                                               const WeightedView& view,
                                               std::size_t j);

// Same grouping applied to an explicit (value, weight, class) list; used by
// the oversampling baseline. The list is sorted in place.
struct ValueSample {
  double value;
  double weight;
  int cls;
};
std::vector<ValueGroup> group_value_samples(std::vector<ValueSample>& samples,
                                            int classes);

}  // namespace softtree
