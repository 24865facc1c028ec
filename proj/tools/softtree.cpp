#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "softtree/dataset.hpp"
#include "softtree/experiments.hpp"
#include "softtree/model_io.hpp"
#include "softtree/predict.hpp"
#include "softtree/prune.hpp"
#include "softtree/split.hpp"
#include "softtree/stats.hpp"
#include "softtree/synth.hpp"
#include "softtree/tree.hpp"

namespace st = softtree;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> out;
  for (const std::string& item : split_list(text)) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(flag + ": empty list");
  return out;
}

std::string path_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// ---- train ----

struct TrainArgs {
  std::string data, label = "class", out;
  std::string search = "hard", prop = "hard";
  double us = 0.0, ut = 0.0;
  double confidence = 0.25;
  int target_leaves = 0;
  double min_branch = 2.0;
  int max_depth = -1;
  std::uint64_t seed = 1;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  st::Dataset train = st::load_csv(a.data, a.label);

  // u = 0 is exactly hard behavior, so normalize the echoed configuration.
  bool soft_search = a.search == "soft" && a.us > 0;
  bool soft_prop = a.prop == "soft" && a.ut > 0;
  st::GrowConfig grow;
  grow.search = soft_search ? st::SearchMode::soft : st::SearchMode::hard;
  grow.u_search = soft_search ? a.us : 0.0;
  grow.propagation =
      soft_prop ? st::PropagationMode::soft : st::PropagationMode::hard;
  grow.u_propagation = soft_prop ? a.ut : 0.0;
  grow.min_branch_weight = a.min_branch;
  grow.max_depth = a.max_depth;
  grow.quiet = a.quiet;

  double confidence = a.confidence;
  if (a.target_leaves > 0) {
    st::RngStream rng(a.seed);
    st::CalibrationResult cal = st::calibrate_confidence_for_target_leaves(
        train, a.target_leaves, grow, rng);
    confidence = cal.confidence;
    std::printf(
        "calibrated confidence %.6g (cross-validated mean leaves %.2f, "
        "target %d)\n",
        cal.confidence, cal.mean_leaves, cal.target_used);
  }

  st::TreePtr tree = st::grow_tree(train, grow);
  st::TreePtr pruned =
      st::ebp_prune(train, *tree, st::PruneConfig{confidence, true}, grow);

  st::Model model;
  model.class_names = train.class_names;
  model.attributes = train.attributes;
  model.means = st::attribute_means(train);
  model.search = grow.search;
  model.u_search = grow.u_search;
  model.propagation = grow.propagation;
  model.u_propagation = grow.u_propagation;
  model.confidence = confidence;
  model.tree = std::move(pruned);
  st::save_model(model, a.out);

  double train_acc = st::accuracy(*model.tree, train, st::EvalConfig{});
  std::printf("leaves %zu\ntraining accuracy %.6f\nmodel written to %s\n",
              st::tree_leaf_count(*model.tree), train_acc, a.out.c_str());
  return 0;
}

// ---- predict ----

struct PredictArgs {
  std::string model, data, label = "class", out;
  std::string eval = "hard";
  double ue = 0.0;
};

int run_predict(const PredictArgs& a) {
  st::Model model = st::load_model(a.model);
  st::Dataset data = st::load_csv(a.data, a.label);
  st::check_model_compatible(model, data);

  bool soft = a.eval == "soft" && a.ue > 0;
  st::EvalConfig ec = st::model_eval_config(
      model, soft ? st::PropagationMode::soft : st::PropagationMode::hard,
      soft ? a.ue : 0.0);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw std::runtime_error("cannot write '" + a.out + "'");
  }
  std::ostream& out = a.out.empty() ? std::cout : file;

  out << "row,class";
  for (const std::string& name : model.class_names) out << ",p_" << name;
  out << '\n';
  std::vector<double> x(data.cols());
  char buf[32];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) x[j] = data.at(i, j);
    std::vector<double> probs = st::predict_proba(*model.tree, x, ec);
    int cls = 0;
    for (int k = 1; k < static_cast<int>(probs.size()); ++k)
      if (probs[k] > probs[cls]) cls = k;
    out << i << ',' << model.class_names[cls];
    for (double p : probs) {
      std::snprintf(buf, sizeof buf, "%.6f", p);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed");
  if (!a.out.empty())
    std::printf("wrote %zu predictions to %s\n", data.rows(), a.out.c_str());
  return 0;
}

// ---- synth ----

struct SynthArgs {
  std::size_t rows = 500, features = 15, informative = 0;
  int classes = 2;
  double sep = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  std::size_t informative =
      a.informative > 0 ? a.informative : (2 * a.features + 2) / 3;
  st::RngStream rng(a.seed);
  st::Dataset data =
      st::synth_guyon(a.rows, a.features, informative, a.classes, a.sep, rng);
  st::save_csv(data, a.out, "class");
  std::printf("wrote %zu rows x %zu features (%d classes) to %s\n",
              data.rows(), data.cols(), data.class_count(), a.out.c_str());
  return 0;
}

// ---- experiment ----

struct ExperimentArgs {
  int exp = 1;
  std::string suite;
  std::vector<std::string> data;
  std::string label = "class";
  std::string out_dir = ".";
  std::string noise, methods, grid, wgrid;
  int perms = 30;
  double train_fraction = 0.7;
  int target_leaves = 15;
  int folds = 10;
  int udt_samples = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool timing = false;
};

void print_summary_table(const std::vector<st::SummaryRow>& rows) {
  std::printf("%-6s %8s %12s %12s %10s %10s %6s\n", "method", "noise",
              "leaves(z)", "accuracy(z)", "p(leaves)", "p(acc)", "pairs");
  auto cell = [](double v, const char* fmt) {
    if (std::isnan(v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  for (const st::SummaryRow& r : rows) {
    std::printf("%-6s %8.3g %12s %12s %10s %10s %6zu\n",
                st::method_name(r.method), r.noise,
                cell(r.mean_leaves_z, "%.3f").c_str(),
                cell(r.mean_accuracy_z, "%.3f").c_str(),
                cell(r.p_leaves, "%.4g").c_str(),
                cell(r.p_accuracy, "%.4g").c_str(), r.pairs);
  }
}

int run_experiment_cmd(const ExperimentArgs& a) {
  st::ExperimentPlan plan;
  plan.experiment = a.exp;
  plan.permutations = a.perms;
  plan.train_fraction = a.train_fraction;
  plan.target_leaves = a.target_leaves;
  plan.cv_folds = a.folds;
  plan.udt_samples = a.udt_samples;
  plan.seed = a.seed;
  plan.jobs = a.jobs;
  plan.timing = a.timing;
  if (!a.noise.empty())
    plan.noise_factors = parse_number_list(a.noise, "--noise");
  if (!a.grid.empty()) plan.u_grid = parse_number_list(a.grid, "--grid");
  if (!a.wgrid.empty()) plan.w_grid = parse_number_list(a.wgrid, "--wgrid");
  if (!a.methods.empty()) {
    plan.methods.clear();
    for (const std::string& name : split_list(a.methods)) {
      std::optional<st::Method> m = st::parse_method(name);
      if (!m)
        throw std::invalid_argument("--methods: unknown method '" + name +
                                    "' (know c45, ss, stp, se, udt)");
      plan.methods.push_back(*m);
    }
  }

  if (a.suite.empty() == a.data.empty())
    throw std::invalid_argument(
        "pass exactly one of --suite synth5 or --data <csv>");
  std::vector<st::NamedDataset> datasets;
  if (!a.suite.empty()) {
    if (a.suite != "synth5")
      throw std::invalid_argument("unknown suite '" + a.suite +
                                  "' (know synth5)");
    st::RngStream root(plan.seed);
    datasets = st::synth_suite(root);
  } else {
    for (const std::string& path : a.data)
      datasets.push_back({path_stem(path), st::load_csv(path, a.label)});
  }

  st::ExperimentResult result = st::run_experiment(plan, datasets);

  for (const st::DatasetCalibration& c : result.calibrations)
    std::printf(
        "dataset %s: pruning confidence %.6g (mean leaves %.2f, target %d)\n",
        c.dataset.c_str(), c.confidence, c.mean_leaves, c.target_used);

  std::filesystem::create_directories(a.out_dir);
  std::filesystem::path dir(a.out_dir);
  st::write_records_csv((dir / "results.csv").string(), result.records);
  std::printf("\nexperiment %d, %zu records\n", plan.experiment,
              result.records.size());

  // Standardization needs zero-noise baseline cells; without them only the
  // raw records are useful.
  try {
    std::vector<st::SummaryRow> summary =
        st::summarize_records(result.records, false);
    st::write_summary_csv((dir / "summary.csv").string(), summary);
    st::write_plot_csv((dir / "plot_accuracy.csv").string(), summary,
                       st::Metric::accuracy);
    st::write_plot_csv((dir / "plot_leaves.csv").string(), summary,
                       st::Metric::leaves);
    print_summary_table(summary);
    std::printf(
        "\nwrote results.csv, summary.csv, plot_accuracy.csv, plot_leaves.csv "
        "to %s\n",
        a.out_dir.c_str());
  } catch (const std::exception& e) {
    std::printf("summary skipped (%s)\nwrote results.csv to %s\n", e.what(),
                a.out_dir.c_str());
  }
  return 0;
}

// ---- validate ----

struct ValidateArgs {
  double sigma = 0.0;
  std::size_t draws = 1000000;
  std::uint64_t seed = 1;
  bool inject_failure = false;
};

int run_validate(const ValidateArgs& a) {
  int failures = 0;

  if (a.sigma > 0) {
    double pd = st::normal_cdf(4.0 / (2.0 * a.sigma));
    std::printf("at sigma %.6g:\n", a.sigma);
    std::printf("  P(d < 0) = %.6f\n", pd);
    std::printf(
        "  misclassification probability (x_t = 1): train-uncertain %.6f, "
        "both-uncertain %.6f\n\n",
        st::toy_misclassification_prob(a.sigma, 1.0,
                                       st::ToyMode::train_uncertain),
        st::toy_misclassification_prob(a.sigma, 1.0,
                                       st::ToyMode::both_uncertain));
  }

  std::printf("two-point analytic curve vs Monte-Carlo (%zu draws, x_t = 1):\n",
              a.draws);
  st::RngStream rng(a.seed);
  const double sigmas[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  int mode_id = 0;
  for (st::ToyMode mode :
       {st::ToyMode::train_uncertain, st::ToyMode::both_uncertain}) {
    const char* label =
        mode == st::ToyMode::train_uncertain ? "train-uncertain" : "both-uncertain";
    for (double sigma : sigmas) {
      double closed = st::toy_misclassification_prob(sigma, 1.0, mode);
      st::RngStream draw_rng = rng.derive(
          {1, static_cast<std::uint64_t>(mode_id),
           std::bit_cast<std::uint64_t>(sigma)});
      double mc =
          st::toy_misclassification_mc(sigma, 1.0, mode, a.draws, draw_rng);
      if (a.inject_failure) mc += 0.05;
      double diff = std::fabs(closed - mc);
      bool ok = diff <= 0.005;
      failures += !ok;
      std::printf("  %-16s sigma %-5.3g closed %.6f  mc %.6f  |diff| %.6f  %s\n",
                  label, sigma, closed, mc, diff, ok ? "PASS" : "FAIL");
    }
    ++mode_id;
  }

  std::printf("smoothed-search mass increments vs direct CDF sums:\n");
  for (int rep = 0; rep < 20; ++rep) {
    st::RngStream r = rng.derive({2, static_cast<std::uint64_t>(rep)});
    int classes = 2 + static_cast<int>(r.below(2));
    std::size_t n = 3 + r.below(8);
    std::vector<st::ValueSample> samples;
    for (std::size_t i = 0; i < n; ++i)
      samples.push_back({-5.0 + 10.0 * r.uniform(), 0.5 + 1.5 * r.uniform(),
                         static_cast<int>(r.below(classes))});
    std::vector<st::ValueGroup> groups =
        st::group_value_samples(samples, classes);
    double sigma = 0.1 + 1.9 * r.uniform();
    st::SoftScan scan =
        st::soft_gain_scan(groups, classes, sigma, st::SoftSearchConfig{});

    double max_err = 0;
    for (std::size_t k = 0; k + 1 < scan.taus.size(); ++k) {
      for (int c = 0; c < classes; ++c) {
        double direct = 0;
        for (const st::ValueGroup& g : groups)
          direct += g.class_weights[c] *
                    st::normal_cdf((scan.taus[k] - g.value) / sigma);
        max_err = std::max(
            max_err, std::fabs(direct - scan.left_class[k * classes + c]));
      }
    }
    double total = 0;
    for (const st::ValueGroup& g : groups) total += g.weight;
    max_err = std::max(max_err, std::fabs(scan.left_weight.back() - total));
    bool ok = max_err <= 1e-9;
    failures += !ok;
    std::printf("  input %2d: %zu values, %d classes, sigma %.3f, grid %zu, "
                "max |err| %.3g  %s\n",
                rep + 1, groups.size(), classes, sigma, scan.taus.size(),
                max_err, ok ? "PASS" : "FAIL");
  }

  if (failures) {
    std::printf("\n%d check(s) FAILED\n", failures);
    return 3;
  }
  std::printf("\nall checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "softtree: decision-tree induction with Gaussian measurement-"
      "uncertainty models (smoothed split search, fractional propagation, "
      "soft evaluation), error-based pruning, an oversampling baseline, and "
      "a noise-robustness experiment harness"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "read options from an INI file with one [section] per "
                 "subcommand (given before the subcommand name)");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "Train a tree and write a model file");
  train->add_option("--data", ta.data, "training CSV")->required();
  train->add_option("--label", ta.label, "label column name (default class)");
  train->add_option("--out", ta.out, "model file to write")->required();
  train->add_option("--search", ta.search, "split search: hard or soft")
      ->check(CLI::IsMember({"hard", "soft"}));
  train->add_option("--us", ta.us, "search uncertainty factor (requires --search soft)");
  train->add_option("--prop", ta.prop, "training propagation: hard or soft")
      ->check(CLI::IsMember({"hard", "soft"}));
  train->add_option("--ut", ta.ut, "propagation uncertainty factor (requires --prop soft)");
  train->add_option("--confidence", ta.confidence, "pruning confidence factor (default 0.25)");
  train->add_option("--target-leaves", ta.target_leaves,
                    "calibrate the confidence factor to this mean leaf count");
  train->add_option("--min-branch", ta.min_branch, "minimum training weight per branch (default 2)");
  train->add_option("--max-depth", ta.max_depth, "depth cap, negative = unbounded");
  train->add_option("--seed", ta.seed, "random seed (calibration folds)");
  train->add_flag("--quiet", ta.quiet, "suppress degenerate-scale warnings");

  PredictArgs pa;
  CLI::App* predict = app.add_subcommand("predict", "Classify a CSV with a trained model");
  predict->add_option("--model", pa.model, "model file")->required();
  predict->add_option("--data", pa.data, "input CSV (same schema as training data)")->required();
  predict->add_option("--label", pa.label, "label column name (default class)");
  predict->add_option("--out", pa.out, "predictions CSV (default stdout)");
  predict->add_option("--eval", pa.eval, "evaluation mode: hard or soft")
      ->check(CLI::IsMember({"hard", "soft"}));
  predict->add_option("--ue", pa.ue, "evaluation uncertainty factor (requires --eval soft)");

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic classification CSV");
  synth->add_option("--rows", sa.rows, "number of rows")->required();
  synth->add_option("--features", sa.features, "number of features")->required();
  synth->add_option("--classes", sa.classes, "number of classes (default 2)");
  synth->add_option("--informative", sa.informative,
                    "informative features (default ceil(2/3 of features))");
  synth->add_option("--sep", sa.sep, "class separation (default 1)");
  synth->add_option("--seed", sa.seed, "random seed");
  synth->add_option("--out", sa.out, "output CSV")->required();

  ExperimentArgs ea;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Run the noise-robustness experiment grid");
  experiment->add_option("--exp", ea.exp, "1: noise on training side, 2: on test side")
      ->check(CLI::IsMember({1, 2}));
  experiment->add_option("--suite", ea.suite, "built-in dataset suite: synth5");
  experiment->add_option("--data", ea.data, "dataset CSVs (repeatable)");
  experiment->add_option("--label", ea.label, "label column name (default class)");
  experiment->add_option("--out", ea.out_dir, "output directory (default .)");
  experiment->add_option("--noise", ea.noise, "comma-separated noise factors");
  experiment->add_option("--perms", ea.perms, "train/test permutations (default 30)");
  experiment->add_option("--methods", ea.methods,
                         "comma-separated subset of c45,ss,stp,se,udt");
  experiment->add_option("--grid", ea.grid, "comma-separated u grid");
  experiment->add_option("--wgrid", ea.wgrid, "comma-separated w grid (udt)");
  experiment->add_option("--train-fraction", ea.train_fraction, "train share (default 0.7)");
  experiment->add_option("--target-leaves", ea.target_leaves,
                         "pruning calibration target (default 15)");
  experiment->add_option("--folds", ea.folds, "CV folds for tuning (default 10)");
  experiment->add_option("--udt-samples", ea.udt_samples, "samples per measurement (default 100)");
  experiment->add_option("--seed", ea.seed, "random seed");
  experiment->add_option("--jobs", ea.jobs, "parallel workers (default 1)");
  experiment->add_flag("--timing", ea.timing, "measure per-cell train+eval wall time");

  ValidateArgs va;
  CLI::App* validate = app.add_subcommand(
      "validate", "Run the built-in analytic validation suites");
  validate->add_option("--sigma", va.sigma, "also print the closed forms at this sigma");
  validate->add_option("--draws", va.draws, "Monte-Carlo draws (default 1e6)");
  validate->add_option("--seed", va.seed, "random seed");
  validate->add_flag("--inject-failure", va.inject_failure,
                     "perturb the Monte-Carlo values to exercise the failure path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) {
      if (train->count("--us") && ta.search != "soft")
        throw std::invalid_argument("--us requires --search soft");
      if (train->count("--ut") && ta.prop != "soft")
        throw std::invalid_argument("--ut requires --prop soft");
      if (train->count("--confidence") && train->count("--target-leaves"))
        throw std::invalid_argument(
            "--confidence and --target-leaves are mutually exclusive");
      return run_train(ta);
    }
    if (predict->parsed()) {
      if (predict->count("--ue") && pa.eval != "soft")
        throw std::invalid_argument("--ue requires --eval soft");
      return run_predict(pa);
    }
    if (synth->parsed()) return run_synth(sa);
    if (experiment->parsed()) return run_experiment_cmd(ea);
    if (validate->parsed()) return run_validate(va);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
