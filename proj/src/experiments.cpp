#include "softtree/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "softtree/predict.hpp"
#include "softtree/prune.hpp"
#include "softtree/stats.hpp"
#include "softtree/tree.hpp"
#include "softtree/udt.hpp"

namespace softtree {

namespace {

// Derivation sites under the plan's root stream. Cell streams never encode
// the experiment number, so the two protocols coincide exactly at zero noise.
constexpr std::uint64_t kSiteSplit = 1;
constexpr std::uint64_t kSiteCell = 2;
constexpr std::uint64_t kSiteCalibration = 3;

// Paths under a cell stream.
constexpr std::uint64_t kPathTune = 1;
constexpr std::uint64_t kPathTrainNoise = 2;
constexpr std::uint64_t kPathTestNoise = 3;
constexpr std::uint64_t kPathUdtFinal = 4;

// Paths under a tuning stream.
constexpr std::uint64_t kPathFolds = 1;
constexpr std::uint64_t kPathFoldNoise = 2;
constexpr std::uint64_t kPathUdtFold = 3;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t noise_bits(double n) { return std::bit_cast<std::uint64_t>(n); }

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

GrowConfig grow_for(Method m, double param, bool quiet) {
  GrowConfig g;
  g.quiet = quiet;
  if (m == Method::ss) {
    g.search = SearchMode::soft;
    g.u_search = param;
  } else if (m == Method::stp) {
    g.propagation = PropagationMode::soft;
    g.u_propagation = param;
  }
  return g;
}

TreePtr train_pruned(const Dataset& train, Method m, double param,
                     double confidence, int udt_samples, bool quiet,
                     const RngStream& udt_rng) {
  PruneConfig pc{confidence, true};
  if (m == Method::udt) {
    GrowConfig g;
    g.quiet = quiet;
    return train_udt(train, g, pc, UdtConfig{param, udt_samples}, udt_rng);
  }
  GrowConfig g = grow_for(m, param, quiet);
  TreePtr tree = grow_tree(train, g);
  return ebp_prune(train, *tree, pc, g);
}

EvalConfig eval_for(Method m, double param, const Dataset& train) {
  EvalConfig ec;
  if (m == Method::se) {
    ec.mode = PropagationMode::soft;
    ec.u_eval = param;
    ec.means = attribute_means(train);
  }
  return ec;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::c45: return "c45";
    case Method::ss: return "ss";
    case Method::stp: return "stp";
    case Method::se: return "se";
    case Method::udt: return "udt";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::c45, Method::ss, Method::stp, Method::se,
                   Method::udt})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

void validate_plan(const ExperimentPlan& plan) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("experiment plan: " + what);
  };
  if (plan.experiment != 1 && plan.experiment != 2)
    fail("experiment must be 1 or 2");
  if (plan.noise_factors.empty()) fail("no noise factors");
  for (double n : plan.noise_factors)
    if (!(n >= 0)) fail("noise factors must be >= 0");
  if (plan.permutations < 2) fail("need at least 2 permutations");
  if (!(plan.train_fraction > 0 && plan.train_fraction < 1))
    fail("train fraction must be inside (0, 1)");
  if (plan.methods.empty()) fail("no methods");
  for (std::size_t i = 0; i < plan.methods.size(); ++i)
    for (std::size_t k = i + 1; k < plan.methods.size(); ++k)
      if (plan.methods[i] == plan.methods[k]) fail("duplicate method");
  auto needs = [&](Method m) {
    return std::find(plan.methods.begin(), plan.methods.end(), m) !=
           plan.methods.end();
  };
  if (needs(Method::ss) || needs(Method::stp) || needs(Method::se)) {
    if (plan.u_grid.empty()) fail("empty u grid");
    for (double u : plan.u_grid)
      if (!(u >= 0)) fail("u grid values must be >= 0");
  }
  if (needs(Method::udt)) {
    if (plan.w_grid.empty()) fail("empty w grid");
    for (double w : plan.w_grid)
      if (!(w >= 0)) fail("w grid values must be >= 0");
    if (plan.udt_samples < 1) fail("udt samples must be >= 1");
  }
  if (plan.cv_folds < 2) fail("need at least 2 CV folds");
  if (plan.target_leaves < 2) fail("target leaves must be >= 2");
  if (plan.jobs < 1) fail("jobs must be >= 1");
}

double cv_tune_parameter(const Dataset& train, Method method,
                         std::span<const double> grid, NoiseSide side,
                         double noise_factor, double confidence, int folds,
                         int udt_samples, bool quiet, RngStream& rng) {
  if (grid.empty()) throw std::invalid_argument("cv_tune_parameter: empty grid");
  if (method == Method::c45)
    throw std::invalid_argument("cv_tune_parameter: plain C4.5 has no parameter");
  RngStream fold_rng = rng.derive({kPathFolds});
  std::vector<int> fold_of = stratified_folds(train, folds, fold_rng);
  std::vector<long double> score(grid.size(), 0.0L);
  EvalConfig hard_eval;
  for (int f = 0; f < folds; ++f) {
    SplitPair fs = fold_split(train, fold_of, f);
    RngStream noise_rng =
        rng.derive({kPathFoldNoise, static_cast<std::uint64_t>(f)});
    Dataset cvtrain = side == NoiseSide::train_folds
                          ? add_gaussian_noise(fs.train, noise_factor, noise_rng)
                          : std::move(fs.train);
    Dataset cvval = side == NoiseSide::validation_folds
                        ? add_gaussian_noise(fs.test, noise_factor, noise_rng)
                        : std::move(fs.test);
    if (method == Method::se) {
      // The grown tree does not depend on u_e; evaluate the whole grid on one
      // fit.
      GrowConfig g = grow_for(Method::se, 0.0, quiet);
      TreePtr tree = grow_tree(cvtrain, g);
      TreePtr pruned = ebp_prune(cvtrain, *tree, PruneConfig{confidence, true}, g);
      EvalConfig ec;
      ec.mode = PropagationMode::soft;
      ec.means = attribute_means(cvtrain);
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        ec.u_eval = grid[gi];
        score[gi] += accuracy(*pruned, cvval, ec);
      }
    } else {
      for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        RngStream udt_rng =
            rng.derive({kPathUdtFold, static_cast<std::uint64_t>(f), gi});
        TreePtr model = train_pruned(cvtrain, method, grid[gi], confidence,
                                     udt_samples, quiet, udt_rng);
        score[gi] += accuracy(*model, cvval, hard_eval);
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t gi = 1; gi < grid.size(); ++gi)
    if (score[gi] > score[best] ||
        (score[gi] == score[best] && grid[gi] < grid[best]))
      best = gi;
  return grid[best];
}

namespace {

RunRecord run_cell(const ExperimentPlan& plan, const NamedDataset& nd,
                   std::size_t di, double confidence, Method m, double n,
                   int p) {
  RngStream root(plan.seed);
  RngStream split_rng =
      root.derive({kSiteSplit, di, static_cast<std::uint64_t>(p)});
  SplitPair tt = stratified_split(nd.data, plan.train_fraction, split_rng);
  RngStream cell =
      root.derive({kSiteCell, di, static_cast<std::uint64_t>(m), noise_bits(n),
                   static_cast<std::uint64_t>(p)});

  double param = kNaN;
  if (m != Method::c45) {
    RngStream tune_rng = cell.derive({kPathTune});
    std::span<const double> grid =
        m == Method::udt ? std::span<const double>(plan.w_grid)
                         : std::span<const double>(plan.u_grid);
    NoiseSide side = plan.experiment == 1 ? NoiseSide::train_folds
                                          : NoiseSide::validation_folds;
    param = cv_tune_parameter(tt.train, m, grid, side, n, confidence,
                              plan.cv_folds, plan.udt_samples, plan.quiet,
                              tune_rng);
  }

  RngStream train_noise_rng = cell.derive({kPathTrainNoise});
  Dataset train_final = plan.experiment == 1
                            ? add_gaussian_noise(tt.train, n, train_noise_rng)
                            : std::move(tt.train);
  RngStream test_noise_rng = cell.derive({kPathTestNoise});
  Dataset test_final = plan.experiment == 2
                           ? add_gaussian_noise(tt.test, n, test_noise_rng)
                           : std::move(tt.test);

  auto t0 = std::chrono::steady_clock::now();
  TreePtr tree = train_pruned(train_final, m, param, confidence,
                              plan.udt_samples, plan.quiet,
                              cell.derive({kPathUdtFinal}));
  double acc = accuracy(*tree, test_final, eval_for(m, param, train_final));
  auto t1 = std::chrono::steady_clock::now();

  RunRecord r;
  r.dataset = nd.name;
  r.method = m;
  r.noise = n;
  r.permutation = p;
  r.leaves = static_cast<double>(tree_leaf_count(*tree));
  r.accuracy = acc;
  r.param = param;
  r.seconds = plan.timing
                  ? std::chrono::duration<double>(t1 - t0).count()
                  : 0.0;
  return r;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::vector<NamedDataset>& datasets) {
  validate_plan(plan);
  if (datasets.empty())
    throw std::invalid_argument("run_experiment: no datasets");

  RngStream root(plan.seed);
  ExperimentResult out;
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    GrowConfig base;
    base.quiet = plan.quiet;
    RngStream cal_rng = root.derive({kSiteCalibration, di});
    CalibrationResult cal = calibrate_confidence_for_target_leaves(
        datasets[di].data, plan.target_leaves, base, cal_rng, plan.cv_folds);
    out.calibrations.push_back(
        {datasets[di].name, cal.confidence, cal.mean_leaves, cal.target_used});
  }

  struct Cell {
    std::size_t di;
    std::size_t ni;
    std::size_t mi;
    int p;
  };
  std::vector<Cell> cells;
  for (std::size_t di = 0; di < datasets.size(); ++di)
    for (std::size_t ni = 0; ni < plan.noise_factors.size(); ++ni)
      for (std::size_t mi = 0; mi < plan.methods.size(); ++mi)
        for (int p = 0; p < plan.permutations; ++p)
          cells.push_back({di, ni, mi, p});

  out.records.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) break;
      }
      try {
        const Cell& c = cells[i];
        out.records[i] =
            run_cell(plan, datasets[c.di], c.di,
                     out.calibrations[c.di].confidence, plan.methods[c.mi],
                     plan.noise_factors[c.ni], c.p);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  int jobs = std::max(1, plan.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

ExperimentResult run_experiment1(ExperimentPlan plan,
                                 const std::vector<NamedDataset>& datasets) {
  plan.experiment = 1;
  return run_experiment(plan, datasets);
}

ExperimentResult run_experiment2(ExperimentPlan plan,
                                 const std::vector<NamedDataset>& datasets) {
  plan.experiment = 2;
  return run_experiment(plan, datasets);
}

Standardizer baseline_standardizer(std::span<const double> values) {
  if (values.size() < 2)
    throw std::invalid_argument(
        "baseline_standardizer: need at least two values");
  long double sum = 0;
  for (double v : values) sum += v;
  long double mean = sum / values.size();
  long double ss = 0;
  for (double v : values) {
    long double d = v - mean;
    ss += d * d;
  }
  Standardizer z;
  z.mean = static_cast<double>(mean);
  z.std = static_cast<double>(std::sqrt(ss / (values.size() - 1)));
  return z;
}

namespace {

struct DatasetZ {
  Standardizer leaves;
  Standardizer accuracy;
};

// Baseline standardizers per dataset, keyed by name. Throws when a dataset
// lacks its plain-C4.5 zero-noise cells.
std::map<std::string, DatasetZ> dataset_baselines(
    std::span<const RunRecord> records, bool quiet) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      base;
  for (const RunRecord& r : records) {
    auto& slot = base[r.dataset];
    if (r.method == Method::c45 && r.noise == 0.0) {
      slot.first.push_back(r.leaves);
      slot.second.push_back(r.accuracy);
    }
  }
  std::map<std::string, DatasetZ> out;
  for (auto& [name, vals] : base) {
    if (vals.first.size() < 2)
      throw std::runtime_error("standardize: dataset '" + name +
                               "' lacks (c45, noise 0) baseline cells");
    DatasetZ z;
    z.leaves = baseline_standardizer(vals.first);
    z.accuracy = baseline_standardizer(vals.second);
    if (!quiet) {
      if (!z.leaves.usable())
        std::cerr << "warning: dataset '" << name
                  << "' has a degenerate leaf-count baseline; standardized "
                     "leaves are undefined for it\n";
      if (!z.accuracy.usable())
        std::cerr << "warning: dataset '" << name
                  << "' has a degenerate accuracy baseline; standardized "
                     "accuracy is undefined for it\n";
    }
    out.emplace(name, z);
  }
  return out;
}

}  // namespace

std::vector<double> standardize_metrics(std::span<const RunRecord> records,
                                        Metric metric, bool quiet) {
  std::map<std::string, DatasetZ> base = dataset_baselines(records, quiet);
  std::vector<double> z;
  z.reserve(records.size());
  for (const RunRecord& r : records) {
    const DatasetZ& dz = base.at(r.dataset);
    const Standardizer& s =
        metric == Metric::leaves ? dz.leaves : dz.accuracy;
    double v = metric == Metric::leaves ? r.leaves : r.accuracy;
    z.push_back(s.usable() ? s.z(v) : kNaN);
  }
  return z;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (std::isnan(d))
      throw std::invalid_argument("wilcoxon_signed_rank: NaN difference");
    if (d != 0.0) diff.push_back(d);
  }
  const std::size_t n = diff.size();
  if (n < 5)
    throw std::runtime_error(
        "wilcoxon_signed_rank: fewer than 5 nonzero differences");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(diff[x]) < std::fabs(diff[y]);
  });

  std::vector<double> rank(n);
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && std::fabs(diff[order[j]]) == std::fabs(diff[order[i]]))
      ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
    tie_sizes.push_back(j - i);
    i = j;
  }

  double w_plus = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (diff[k] > 0) w_plus += rank[k];
  const double total = static_cast<double>(n) * (n + 1) / 2.0;
  const double w_minus = total - w_plus;
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult res;
  res.w = w;
  res.n = static_cast<int>(n);

  if (n <= 25) {
    // Exact null distribution of W+ over the 2^n sign assignments, on doubled
    // ranks so tied (half-integer) ranks stay integral.
    std::vector<long long> r2(n);
    long long total2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      r2[k] = std::llround(2.0 * rank[k]);
      total2 += r2[k];
    }
    std::vector<double> count(total2 + 1, 0.0);  // exact: counts < 2^53
    count[0] = 1.0;
    long long reach = 0;
    for (std::size_t k = 0; k < n; ++k) {
      reach += r2[k];
      for (long long s = reach; s >= r2[k]; --s) count[s] += count[s - r2[k]];
    }
    const long long w2 = std::llround(2.0 * w);
    long double tail = 0;
    for (long long s = 0; s <= std::min(w2, total2); ++s) tail += count[s];
    long double denom = std::pow(2.0L, static_cast<int>(n));
    res.p = static_cast<double>(std::min(1.0L, 2.0L * tail / denom));
  } else {
    const double nn = static_cast<double>(n);
    double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
    for (std::size_t t : tie_sizes) {
      double td = static_cast<double>(t);
      var -= (td * td * td - td) / 48.0;
    }
    const double mu = nn * (nn + 1) / 4.0;
    const double z = (w - mu) / std::sqrt(var);
    res.p = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return res;
}

std::vector<SummaryRow> summarize_records(std::span<const RunRecord> records,
                                          bool quiet) {
  std::vector<double> zl = standardize_metrics(records, Metric::leaves, quiet);
  std::vector<double> za =
      standardize_metrics(records, Metric::accuracy, true);

  std::vector<double> noises;
  for (const RunRecord& r : records) noises.push_back(r.noise);
  std::sort(noises.begin(), noises.end());
  noises.erase(std::unique(noises.begin(), noises.end()), noises.end());

  // Baseline partner per (dataset, noise, permutation).
  std::map<std::tuple<std::string, double, int>, std::size_t> c45_at;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].method == Method::c45)
      c45_at[{records[i].dataset, records[i].noise, records[i].permutation}] =
          i;

  std::vector<SummaryRow> rows;
  for (Method m : {Method::c45, Method::ss, Method::stp, Method::se,
                   Method::udt}) {
    for (double n : noises) {
      long double sum_l = 0, sum_a = 0;
      std::size_t cnt_l = 0, cnt_a = 0, present = 0;
      std::vector<double> ml, ma, bl, ba;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const RunRecord& r = records[i];
        if (r.method != m || r.noise != n) continue;
        ++present;
        if (!std::isnan(zl[i])) {
          sum_l += zl[i];
          ++cnt_l;
        }
        if (!std::isnan(za[i])) {
          sum_a += za[i];
          ++cnt_a;
        }
        if (m != Method::c45) {
          auto it = c45_at.find({r.dataset, r.noise, r.permutation});
          if (it != c45_at.end()) {
            std::size_t bi = it->second;
            if (!std::isnan(zl[i]) && !std::isnan(zl[bi])) {
              ml.push_back(zl[i]);
              bl.push_back(zl[bi]);
            }
            if (!std::isnan(za[i]) && !std::isnan(za[bi])) {
              ma.push_back(za[i]);
              ba.push_back(za[bi]);
            }
          }
        }
      }
      if (present == 0) continue;
      SummaryRow row;
      row.method = m;
      row.noise = n;
      row.mean_leaves_z = cnt_l ? static_cast<double>(sum_l / cnt_l) : kNaN;
      row.mean_accuracy_z = cnt_a ? static_cast<double>(sum_a / cnt_a) : kNaN;
      row.pairs = std::max(ml.size(), ma.size());
      row.p_leaves = kNaN;
      row.p_accuracy = kNaN;
      if (m != Method::c45) {
        try {
          row.p_leaves = wilcoxon_signed_rank(ml, bl).p;
        } catch (const std::exception&) {
        }
        try {
          row.p_accuracy = wilcoxon_signed_rank(ma, ba).p;
        } catch (const std::exception&) {
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double toy_misclassification_prob(double sigma, double x_t, ToyMode mode) {
  if (!(sigma > 0))
    throw std::invalid_argument(
        "toy_misclassification_prob: sigma must be positive");
  const double p_d_neg = normal_cdf(4.0 / (2.0 * sigma));
  double p_c_pos;
  if (mode == ToyMode::train_uncertain) {
    // Split at m ~ N(0, sigma^2/2), test point exact.
    p_c_pos = normal_cdf(x_t * std::numbers::sqrt2 / sigma);
  } else {
    // c = x_t - m ~ N(x_t, 3 sigma^2 / 2).
    p_c_pos =
        normal_cdf(x_t * std::numbers::sqrt2 / (std::sqrt(3.0) * sigma));
  }
  return p_d_neg * (1.0 - p_c_pos) + (1.0 - p_d_neg) * p_c_pos;
}

double toy_misclassification_mc(double sigma, double x_t, ToyMode mode,
                                std::size_t draws, RngStream& rng) {
  if (!(sigma > 0))
    throw std::invalid_argument(
        "toy_misclassification_mc: sigma must be positive");
  if (draws == 0)
    throw std::invalid_argument("toy_misclassification_mc: need draws");
  const double d_std = 2.0 * sigma;
  const double m_std = sigma / std::numbers::sqrt2;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    double d = -4.0 + d_std * rng.normal();
    double m = m_std * rng.normal();
    double t = mode == ToyMode::both_uncertain ? x_t + sigma * rng.normal()
                                               : x_t;
    // Class 0 sits below the split when the measured class-0 point is the
    // smaller one; the true class of the test point is 1.
    bool left_is_class0 = d < 0;
    int yhat = ((t < m) == left_is_class0) ? 0 : 1;
    if (yhat == 0) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(draws);
}

std::vector<SweepRow> confidence_sweep(const Dataset& train,
                                       const Dataset& test,
                                       std::span<const Method> methods,
                                       std::span<const double> confidences,
                                       std::span<const double> u_values,
                                       double noise_train, int udt_samples,
                                       RngStream& rng) {
  if (methods.size() != u_values.size())
    throw std::invalid_argument(
        "confidence_sweep: one parameter value per method required");
  if (methods.empty() || confidences.empty())
    throw std::invalid_argument("confidence_sweep: empty inputs");

  RngStream noise_rng = rng.derive({1});
  Dataset noisy = add_gaussian_noise(train, noise_train, noise_rng);

  struct Grown {
    GrowConfig cfg;
    TreePtr tree;
    EvalConfig eval;
  };
  std::vector<Grown> grown;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    Grown g;
    g.cfg = grow_for(methods[i], u_values[i], true);
    if (methods[i] == Method::udt) {
      RngStream udt_rng = rng.derive({2, i});
      g.cfg.split_override = make_udt_split_override(
          noisy, UdtConfig{u_values[i], udt_samples}, udt_rng);
    }
    g.tree = grow_tree(noisy, g.cfg);
    g.eval = eval_for(methods[i], u_values[i], noisy);
    grown.push_back(std::move(g));
  }

  std::vector<SweepRow> rows;
  for (double c : confidences) {
    for (std::size_t i = 0; i < methods.size(); ++i) {
      TreePtr pruned =
          ebp_prune(noisy, *grown[i].tree, PruneConfig{c, true}, grown[i].cfg);
      SweepRow row;
      row.confidence = c;
      row.method = methods[i];
      row.leaves = static_cast<double>(tree_leaf_count(*pruned));
      row.accuracy = accuracy(*pruned, test, grown[i].eval);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_records_csv(const std::string& path,
                       std::span<const RunRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "dataset,method,noise,permutation,leaves,accuracy,param,seconds\n";
  char buf[64];
  for (const RunRecord& r : records) {
    out << r.dataset << ',' << method_name(r.method) << ',' << g9(r.noise)
        << ',' << r.permutation << ',' << g9(r.leaves) << ',';
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy);
    out << buf << ',';
    if (!std::isnan(r.param)) out << g9(r.param);
    out << ',';
    std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "dataset,method,noise,permutation,leaves,accuracy,param,seconds")
    throw std::runtime_error(path + ": not a records file");
  std::vector<RunRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        parts.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (parts.size() < 8)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 8 fields");
    // A dataset name may itself contain commas; the trailing 7 fields are
    // numeric, everything before them is the name.
    std::size_t tail = parts.size() - 7;
    RunRecord r;
    r.dataset = parts[0];
    for (std::size_t k = 1; k < tail; ++k) r.dataset += "," + parts[k];
    std::optional<Method> m = parse_method(parts[tail]);
    if (!m)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown method '" + parts[tail] + "'");
    r.method = *m;
    try {
      r.noise = std::stod(parts[tail + 1]);
      r.permutation = std::stoi(parts[tail + 2]);
      r.leaves = std::stod(parts[tail + 3]);
      r.accuracy = std::stod(parts[tail + 4]);
      r.param = parts[tail + 5].empty() ? kNaN : std::stod(parts[tail + 5]);
      r.seconds = std::stod(parts[tail + 6]);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed numeric field");
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_csv(const std::string& path,
                       std::span<const SummaryRow> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "method,noise,mean_leaves_z,mean_accuracy_z,p_leaves,p_accuracy,"
         "pairs\n";
  char buf[64];
  auto put_f6 = [&](double v) {
    if (std::isnan(v)) return;
    std::snprintf(buf, sizeof buf, "%.6f", v);
    out << buf;
  };
  auto put_g6 = [&](double v) {
    if (std::isnan(v)) return;
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out << buf;
  };
  for (const SummaryRow& r : rows) {
    out << method_name(r.method) << ',' << g9(r.noise) << ',';
    put_f6(r.mean_leaves_z);
    out << ',';
    put_f6(r.mean_accuracy_z);
    out << ',';
    put_g6(r.p_leaves);
    out << ',';
    put_g6(r.p_accuracy);
    out << ',' << r.pairs << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_plot_csv(const std::string& path, std::span<const SummaryRow> rows,
                    Metric metric) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");

  std::vector<Method> methods;
  std::vector<double> noises;
  for (const SummaryRow& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
    if (std::find(noises.begin(), noises.end(), r.noise) == noises.end())
      noises.push_back(r.noise);
  }
  std::sort(noises.begin(), noises.end());

  out << "noise";
  for (Method m : methods) out << ',' << method_name(m);
  out << '\n';
  char buf[64];
  for (double n : noises) {
    out << g9(n);
    for (Method m : methods) {
      out << ',';
      for (const SummaryRow& r : rows) {
        if (r.method != m || r.noise != n) continue;
        double v = metric == Metric::leaves ? r.mean_leaves_z
                                            : r.mean_accuracy_z;
        if (!std::isnan(v)) {
          std::snprintf(buf, sizeof buf, "%.6f", v);
          out << buf;
        }
        break;
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace softtree
