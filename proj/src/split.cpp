#include "softtree/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "softtree/stats.hpp"

namespace softtree {

double entropy(std::span<const double> counts) {
  long double total = 0;
  for (double c : counts)
    if (c > 0) total += c;
  if (total <= 0) return 0.0;
  long double h = 0;
  for (double c : counts) {
    if (c <= 0) continue;
    long double p = c / total;
    h -= p * std::log2(static_cast<double>(p));
  }
  return static_cast<double>(h);
}

double conditional_entropy(std::span<const double> left,
                           std::span<const double> right) {
  long double wl = 0, wr = 0;
  for (double c : left)
    if (c > 0) wl += c;
  for (double c : right)
    if (c > 0) wr += c;
  long double w = wl + wr;
  if (w <= 0) return 0.0;
  return static_cast<double>((wl * entropy(left) + wr * entropy(right)) / w);
}

double gain_ratio(double gain, double left_weight, double right_weight) {
  double branch[2] = {left_weight, right_weight};
  double hb = entropy(branch);
  if (hb <= 0) return 0.0;
  return gain / hb;
}

namespace {

constexpr double kMinGain = 1e-12;

// Beyond this many sigmas the normal CDF saturates to 0/1 at double
// precision, so skipped contributions are bitwise invisible.
constexpr double kSaturation = 8.5;

struct ClassTotals {
  std::vector<double> counts;
  double weight = 0;
  double parent_entropy = 0;
};

ClassTotals totals_of(const std::vector<ValueGroup>& groups, int classes) {
  ClassTotals t;
  std::vector<long double> acc(classes, 0.0L);
  for (const auto& g : groups)
    for (int y = 0; y < classes; ++y) acc[y] += g.class_weights[y];
  t.counts.resize(classes);
  long double w = 0;
  for (int y = 0; y < classes; ++y) {
    t.counts[y] = static_cast<double>(acc[y]);
    w += acc[y];
  }
  t.weight = static_cast<double>(w);
  t.parent_entropy = entropy(t.counts);
  return t;
}

double branch_gain(const ClassTotals& parent, std::span<const double> left,
                   std::vector<double>& right_buf) {
  int classes = static_cast<int>(parent.counts.size());
  for (int y = 0; y < classes; ++y)
    right_buf[y] = std::max(0.0, parent.counts[y] - left[y]);
  return parent.parent_entropy - conditional_entropy(left, right_buf);
}

}  // namespace

std::optional<SplitCandidate> hard_best_split(
    const std::vector<ValueGroup>& groups, int classes,
    std::uint64_t* gain_evals) {
  if (groups.size() < 2) return std::nullopt;
  ClassTotals parent = totals_of(groups, classes);

  std::vector<long double> left(classes, 0.0L);
  std::vector<double> left_d(classes), right_buf(classes);
  double best_gain = -std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;

  for (std::size_t idx = 1; idx < groups.size(); ++idx) {
    for (int y = 0; y < classes; ++y) left[y] += groups[idx - 1].class_weights[y];
    for (int y = 0; y < classes; ++y) left_d[y] = static_cast<double>(left[y]);
    double gain = branch_gain(parent, left_d, right_buf);
    if (gain_evals) ++*gain_evals;
    if (gain > best_gain) {
      best_gain = gain;
      best_idx = idx;
    }
  }

  SplitCandidate cand;
  cand.threshold = groups[best_idx].value;
  cand.gain = best_gain;
  cand.left_class.assign(classes, 0.0);
  std::fill(left.begin(), left.end(), 0.0L);
  for (std::size_t i = 0; i < best_idx; ++i)
    for (int y = 0; y < classes; ++y) left[y] += groups[i].class_weights[y];
  long double wl = 0;
  for (int y = 0; y < classes; ++y) {
    cand.left_class[y] = static_cast<double>(left[y]);
    wl += left[y];
  }
  cand.left_weight = static_cast<double>(wl);
  cand.right_weight = std::max(0.0, parent.weight - cand.left_weight);
  cand.right_class.resize(classes);
  for (int y = 0; y < classes; ++y)
    cand.right_class[y] = std::max(0.0, parent.counts[y] - cand.left_class[y]);
  cand.gain_ratio = gain_ratio(cand.gain, cand.left_weight, cand.right_weight);
  return cand;
}

std::vector<double> candidate_grid(double value_min, double value_max,
                                   double sigma, const SoftSearchConfig& cfg) {
  if (!(sigma > 0)) throw std::runtime_error("candidate grid needs sigma > 0");
  if (!(cfg.step > 0) || !(cfg.window > 0))
    throw std::runtime_error("grid step and window must be positive");
  const double tau_min = value_min - 0.5 * cfg.window * sigma;
  const double tau_max = value_max + 0.5 * cfg.window * sigma;
  const double h = cfg.step * sigma;
  const double span = tau_max - tau_min;
  double steps = std::floor(span / h + 1e-9);
  if (steps > 2e7) throw std::runtime_error("candidate grid too fine");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 2);
  for (std::size_t k = 0; k <= static_cast<std::size_t>(steps); ++k)
    grid.push_back(tau_min + static_cast<double>(k) * h);
  if (tau_max - grid.back() > 1e-9 * h) grid.push_back(tau_max);
  return grid;
}

DensityIncrements soft_density_increments(const std::vector<ValueGroup>& groups,
                                          int classes,
                                          const std::vector<double>& grid,
                                          double sigma) {
  if (!(sigma > 0)) throw std::runtime_error("density increments need sigma > 0");
  const std::size_t G = grid.size();
  DensityIncrements inc;
  inc.total.assign(G, 0.0);
  inc.per_class.assign(G * classes, 0.0);

  for (const auto& g : groups) {
    // First grid point at which this value's CDF is distinguishable from 0.
    double enter = g.value - kSaturation * sigma;
    std::size_t k = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), enter) - grid.begin());
    double prev = 0.0;
    for (; k < G; ++k) {
      double p;
      if (k + 1 == G) {
        p = 1.0;  // residual: the last point always closes the mass balance
      } else {
        double t = (grid[k] - g.value) / sigma;
        p = t >= kSaturation ? 1.0 : normal_cdf(t);
      }
      double d = p - prev;
      prev = p;
      if (d != 0.0) {
        double* row = &inc.per_class[k * classes];
        double total = 0.0;
        for (int y = 0; y < classes; ++y) {
          double dy = d * g.class_weights[y];
          row[y] += dy;
          total += dy;
        }
        inc.total[k] += total;
      }
      if (p >= 1.0) break;  // saturated: every later increment is exactly 0
    }
  }
  return inc;
}

namespace {

// One pass of running sums over the density increments. Records the curve
// when `record` is set; always tracks the strict argmax (ties resolve to the
// smaller threshold because the scan is ascending).
struct ScanOutcome {
  std::size_t best_k = 0;
  double best_gain = -std::numeric_limits<double>::infinity();
  SoftScan curve;
};

ScanOutcome scan_increments(const ClassTotals& parent,
                            const std::vector<double>& grid,
                            const DensityIncrements& inc, int classes,
                            bool record, std::uint64_t* gain_evals) {
  const std::size_t G = grid.size();
  ScanOutcome out;
  if (record) {
    out.curve.taus = grid;
    out.curve.gains.resize(G);
    out.curve.left_weight.resize(G);
    out.curve.left_class.resize(G * classes);
  }
  std::vector<long double> left(classes, 0.0L);
  std::vector<double> left_d(classes), right_buf(classes);
  for (std::size_t k = 0; k < G; ++k) {
    const double* row = &inc.per_class[k * classes];
    for (int y = 0; y < classes; ++y) left[y] += row[y];
    long double wl = 0;
    for (int y = 0; y < classes; ++y) {
      left_d[y] = static_cast<double>(left[y]);
      wl += left[y];
    }
    double gain = branch_gain(parent, left_d, right_buf);
    if (gain_evals) ++*gain_evals;
    if (record) {
      out.curve.gains[k] = gain;
      out.curve.left_weight[k] = static_cast<double>(wl);
      std::copy(left_d.begin(), left_d.end(),
                out.curve.left_class.begin() + k * classes);
    }
    if (gain > out.best_gain) {
      out.best_gain = gain;
      out.best_k = k;
    }
  }
  return out;
}

SplitCandidate candidate_at(const ClassTotals& parent,
                            const std::vector<double>& grid,
                            const DensityIncrements& inc, int classes,
                            std::size_t k_best, double gain) {
  SplitCandidate cand;
  cand.threshold = grid[k_best];
  cand.gain = gain;
  std::vector<long double> left(classes, 0.0L);
  for (std::size_t k = 0; k <= k_best; ++k) {
    const double* row = &inc.per_class[k * classes];
    for (int y = 0; y < classes; ++y) left[y] += row[y];
  }
  cand.left_class.resize(classes);
  cand.right_class.resize(classes);
  long double wl = 0;
  for (int y = 0; y < classes; ++y) {
    cand.left_class[y] = static_cast<double>(left[y]);
    cand.right_class[y] = std::max(0.0, parent.counts[y] - cand.left_class[y]);
    wl += left[y];
  }
  cand.left_weight = static_cast<double>(wl);
  cand.right_weight = std::max(0.0, parent.weight - cand.left_weight);
  cand.gain_ratio = gain_ratio(cand.gain, cand.left_weight, cand.right_weight);
  return cand;
}

}  // namespace

std::optional<SplitCandidate> soft_best_split(
    const std::vector<ValueGroup>& groups, int classes, double sigma,
    const SoftSearchConfig& cfg, std::uint64_t* gain_evals) {
  if (groups.size() < 2) return std::nullopt;
  ClassTotals parent = totals_of(groups, classes);
  std::vector<double> grid =
      candidate_grid(groups.front().value, groups.back().value, sigma, cfg);
  DensityIncrements inc = soft_density_increments(groups, classes, grid, sigma);
  ScanOutcome scan =
      scan_increments(parent, grid, inc, classes, false, gain_evals);
  return candidate_at(parent, grid, inc, classes, scan.best_k, scan.best_gain);
}

SoftScan soft_gain_scan(const std::vector<ValueGroup>& groups, int classes,
                        double sigma, const SoftSearchConfig& cfg) {
  if (groups.empty()) throw std::runtime_error("gain scan needs values");
  ClassTotals parent = totals_of(groups, classes);
  std::vector<double> grid =
      candidate_grid(groups.front().value, groups.back().value, sigma, cfg);
  DensityIncrements inc = soft_density_increments(groups, classes, grid, sigma);
  return scan_increments(parent, grid, inc, classes, true, nullptr).curve;
}

std::optional<SplitCandidate> best_split_all_attributes(
    const Dataset& data, const WeightedView& view,
    std::span<const double> sigma_per_attribute, const SoftSearchConfig& cfg,
    std::uint64_t* gain_evals) {
  std::optional<SplitCandidate> best;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    std::vector<ValueGroup> groups = sorted_distinct_values(data, view, j);
    double sigma = j < sigma_per_attribute.size() ? sigma_per_attribute[j] : 0.0;
    std::optional<SplitCandidate> cand =
        sigma > 0 ? soft_best_split(groups, data.class_count(), sigma, cfg,
                                    gain_evals)
                  : hard_best_split(groups, data.class_count(), gain_evals);
    if (!cand || cand->gain <= kMinGain) continue;
    cand->attribute = static_cast<int>(j);
    if (!best || cand->gain_ratio > best->gain_ratio) best = std::move(cand);
  }
  return best;
}

}  // namespace softtree
