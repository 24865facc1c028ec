#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softtree/dataset.hpp"
#include "softtree/rng.hpp"
#include "softtree/synth.hpp"

namespace softtree {

// ---- Methods under comparison ----

enum class Method { c45, ss, stp, se, udt };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

// ---- Experiment plan and per-cell results ----

// Noise-robustness protocol: per 70/30 permutation, noise factor and method,
// tune the method's parameter by stratified CV (noise placed on the CV
// training folds in experiment 1, on the CV validation folds in experiment
// 2), then train and evaluate (experiment 1: noisy train / clean test;
// experiment 2: clean train / noisy test). Plain C4.5 skips tuning.
struct ExperimentPlan {
  int experiment = 1;  // 1: noise on the training side, 2: on the test side
  std::vector<double> noise_factors = {0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  int permutations = 30;
  double train_fraction = 0.7;
  std::vector<Method> methods = {Method::c45, Method::ss, Method::stp,
                                 Method::se};
  std::vector<double> u_grid = {0,   0.025, 0.05, 0.1, 0.15,
                                0.2, 0.3,   0.4,  0.5};
  std::vector<double> w_grid = {0, 0.01, 0.02, 0.05, 0.1, 0.2};
  int udt_samples = 100;
  int target_leaves = 15;  // pruning-confidence calibration target
  int cv_folds = 10;
  std::uint64_t seed = 1;
  bool timing = false;  // off: the seconds column is written as 0.000
  bool quiet = true;    // suppress degenerate-sigma warnings in bulk runs
  int jobs = 1;
};

// Throws std::invalid_argument on out-of-range plan fields.
void validate_plan(const ExperimentPlan& plan);

struct RunRecord {
  std::string dataset;
  Method method = Method::c45;
  double noise = 0.0;
  int permutation = 0;
  double leaves = 0.0;
  double accuracy = 0.0;
  double param = 0.0;  // tuned u or w; NaN when the method has no parameter
  double seconds = 0.0;
};

struct DatasetCalibration {
  std::string dataset;
  double confidence = 0.25;
  double mean_leaves = 0.0;
  int target_used = 0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<DatasetCalibration> calibrations;
};

// Runs the full job grid (datasets x noise x methods x permutations) of
// plan.experiment. Deterministic under plan.seed; records are independent of
// execution order and of plan.jobs.
ExperimentResult run_experiment(const ExperimentPlan& plan,
                                const std::vector<NamedDataset>& datasets);
ExperimentResult run_experiment1(ExperimentPlan plan,
                                 const std::vector<NamedDataset>& datasets);
ExperimentResult run_experiment2(ExperimentPlan plan,
                                 const std::vector<NamedDataset>& datasets);

// ---- Parameter tuning ----

enum class NoiseSide { train_folds, validation_folds };

// K-fold stratified CV over the grid: mean validation accuracy per grid
// value, argmax with ties to the smaller value. Noise N(0, n * column mean)
// is added to each fold's data on the given side before evaluation.
double cv_tune_parameter(const Dataset& train, Method method,
                         std::span<const double> grid, NoiseSide side,
                         double noise_factor, double confidence, int folds,
                         int udt_samples, bool quiet, RngStream& rng);

// ---- Standardization and significance ----

enum class Metric { leaves, accuracy };

// z = (value - baseline mean) / baseline sample std.
struct Standardizer {
  double mean = 0.0;
  double std = 0.0;
  bool usable() const { return std > 0.0; }
  double z(double value) const { return (value - mean) / std; }
};

// Mean and sample standard deviation (n - 1) of the baseline values.
// Throws if fewer than two values are given.
Standardizer baseline_standardizer(std::span<const double> values);

// Per-record z-scores of the chosen metric against each dataset's plain-C4.5
// zero-noise baseline cells. Datasets whose baseline has zero spread get NaN
// (with a warning to stderr unless quiet).
std::vector<double> standardize_metrics(std::span<const RunRecord> records,
                                        Metric metric, bool quiet = false);

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; ties get average ranks; W is the smaller signed-rank sum.
// Exact p by enumeration for n <= 25, else normal approximation with tie
// correction. Throws when fewer than 5 nonzero differences remain.
struct WilcoxonResult {
  double w = 0.0;
  double p = 1.0;
  int n = 0;  // pairs used after dropping zero differences
};
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                    std::span<const double> b);

// One summary line per (method, noise): mean standardized leaves/accuracy
// over datasets x permutations, and Wilcoxon p against plain C4.5 at the
// same noise (NaN for the baseline itself or when the test degenerates).
struct SummaryRow {
  Method method = Method::c45;
  double noise = 0.0;
  double mean_leaves_z = 0.0;
  double mean_accuracy_z = 0.0;
  double p_leaves = 0.0;
  double p_accuracy = 0.0;
  std::size_t pairs = 0;
};
std::vector<SummaryRow> summarize_records(std::span<const RunRecord> records,
                                          bool quiet = false);

// ---- Analytic two-point validation ----

// Closed-form misclassification probability of the two-point construction:
// training values at -2 (class 0) and +2 (class 1) carry Gaussian
// measurement noise, the split lands on their midpoint m ~ N(0, sigma^2/2),
// the class boundary orientation follows the sign of the measured
// difference d with P(d < 0) = Phi(4 / (2 sigma)), and the test point x_t of
// class 1 is either exact (train_uncertain) or carries the same noise
// (both_uncertain). Throws on sigma <= 0.
enum class ToyMode { train_uncertain, both_uncertain };
double toy_misclassification_prob(double sigma, double x_t, ToyMode mode);

// Monte-Carlo estimate of the same probability: draws (d, m) from the
// distributions above plus the test draw, classifies, and counts.
double toy_misclassification_mc(double sigma, double x_t, ToyMode mode,
                                std::size_t draws, RngStream& rng);

// ---- Pruning-confidence sweep ----

// Grows one tree per method (u_values aligned with methods; u is the
// method's parameter) on train with optional training noise, then re-prunes
// it at every confidence value. Rows come out confidence-major.
struct SweepRow {
  double confidence = 0.0;
  Method method = Method::c45;
  double leaves = 0.0;
  double accuracy = 0.0;
};
std::vector<SweepRow> confidence_sweep(const Dataset& train,
                                       const Dataset& test,
                                       std::span<const Method> methods,
                                       std::span<const double> confidences,
                                       std::span<const double> u_values,
                                       double noise_train, int udt_samples,
                                       RngStream& rng);

// ---- Report files ----

// Records: one row per RunRecord, columns
// dataset,method,noise,permutation,leaves,accuracy,param,seconds.
void write_records_csv(const std::string& path,
                       std::span<const RunRecord> records);
std::vector<RunRecord> read_records_csv(const std::string& path);

// Summary: one row per (method, noise) with standardized means and p-values.
void write_summary_csv(const std::string& path,
                       std::span<const SummaryRow> rows);

// Plot series: x = noise factor, one column of mean standardized metric per
// method.
void write_plot_csv(const std::string& path, std::span<const SummaryRow> rows,
                    Metric metric);

}  // namespace softtree
