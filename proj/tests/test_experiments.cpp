#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "softtree/experiments.hpp"
#include "softtree/synth.hpp"

using namespace softtree;

namespace {

double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

// Exhaustive sign enumeration with the same conventions as the tested
// routine: average ranks over |d| ties, W = min(W+, W-), two-sided tail
// doubled and clipped at 1.
WilcoxonResult wilcoxon_enumeration(std::span<const double> a,
                                    std::span<const double> b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  int n = static_cast<int>(d.size());
  std::vector<double> mag(n);
  for (int i = 0; i < n; ++i) mag[i] = std::fabs(d[i]);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return mag[x] < mag[y]; });
  std::vector<double> rank(n);
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && mag[order[j]] == mag[order[i]]) ++j;
    double avg = (i + 1 + j) / 2.0;  // mean of ranks i+1 .. j
    for (int k = i; k < j; ++k) rank[order[k]] = avg;
    i = j;
  }
  double w_plus = 0;
  for (int i = 0; i < n; ++i)
    if (d[i] > 0) w_plus += rank[i];
  double total = n * (n + 1) / 2.0;
  double w = std::min(w_plus, total - w_plus);

  // over all 2^n sign assignments, count rank sums <= w
  long count = 0;
  for (long mask = 0; mask < (1L << n); ++mask) {
    double s = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1L << i)) s += rank[i];
    if (s <= w + 1e-9) ++count;
  }
  WilcoxonResult r;
  r.w = w;
  r.n = n;
  r.p = std::min(1.0, 2.0 * static_cast<double>(count) /
                          static_cast<double>(1L << n));
  return r;
}

std::vector<NamedDataset> tiny_suite() {
  RngStream r1(81), r2(82);
  std::vector<NamedDataset> out;
  out.push_back({"alpha", synth_guyon(90, 4, 3, 2, 1.5, r1)});
  out.push_back({"beta", synth_guyon(70, 3, 2, 2, 1.5, r2)});
  return out;
}

ExperimentPlan tiny_plan() {
  ExperimentPlan plan;
  plan.noise_factors = {0, 0.2};
  plan.permutations = 3;
  plan.methods = {Method::c45, Method::se};
  plan.u_grid = {0, 0.1};
  plan.cv_folds = 3;
  plan.seed = 11;
  return plan;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m :
       {Method::c45, Method::ss, Method::stp, Method::se, Method::udt}) {
    auto back = parse_method(method_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK_FALSE(parse_method("nope").has_value());
}

TEST_CASE("plan validation rejects out-of-range fields") {
  auto bad = [](auto mutate) {
    ExperimentPlan p;
    mutate(p);
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
  };
  bad([](ExperimentPlan& p) { p.experiment = 3; });
  bad([](ExperimentPlan& p) { p.noise_factors = {}; });
  bad([](ExperimentPlan& p) { p.noise_factors = {-0.1}; });
  bad([](ExperimentPlan& p) { p.permutations = 1; });
  bad([](ExperimentPlan& p) { p.train_fraction = 1.0; });
  bad([](ExperimentPlan& p) { p.methods = {}; });
  bad([](ExperimentPlan& p) { p.methods = {Method::c45, Method::c45}; });
  bad([](ExperimentPlan& p) { p.u_grid = {}; });  // ss/se need the grid
  bad([](ExperimentPlan& p) {
    p.methods = {Method::udt};
    p.w_grid = {};
  });
  bad([](ExperimentPlan& p) {
    p.methods = {Method::udt};
    p.udt_samples = 0;
  });
  bad([](ExperimentPlan& p) { p.cv_folds = 1; });
  bad([](ExperimentPlan& p) { p.target_leaves = 1; });
  bad([](ExperimentPlan& p) { p.jobs = 0; });
  CHECK_NOTHROW(validate_plan(ExperimentPlan{}));
}

TEST_CASE("standardizer: the worked example is exact") {
  std::vector<double> baseline = {12.0, 15.0, 18.0};
  Standardizer s = baseline_standardizer(baseline);
  CHECK(s.mean == 15.0);
  CHECK(s.std == 3.0);
  CHECK(s.usable());
  CHECK(s.z(12.0) == -1.0);
  CHECK(s.z(19.5) == 1.5);

  std::vector<double> one = {4.0};
  CHECK_THROWS_AS(baseline_standardizer(one), std::invalid_argument);

  std::vector<double> flat = {4.0, 4.0, 4.0};
  CHECK_FALSE(baseline_standardizer(flat).usable());
}

TEST_CASE("record standardization keys on the zero-noise baseline") {
  std::vector<RunRecord> records;
  auto rec = [](const char* ds, Method m, double noise, int perm,
                double leaves) {
    RunRecord r;
    r.dataset = ds;
    r.method = m;
    r.noise = noise;
    r.permutation = perm;
    r.leaves = leaves;
    r.accuracy = leaves / 20.0;
    return r;
  };
  records.push_back(rec("d", Method::c45, 0, 0, 12));
  records.push_back(rec("d", Method::c45, 0, 1, 15));
  records.push_back(rec("d", Method::c45, 0, 2, 18));
  records.push_back(rec("d", Method::ss, 0.3, 0, 19.5));

  std::vector<double> z = standardize_metrics(records, Metric::leaves, true);
  REQUIRE(z.size() == 4);
  CHECK(z[0] == -1.0);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 1.0);
  CHECK(z[3] == 1.5);

  // a dataset without baseline cells cannot be standardized
  records[0].dataset = records[1].dataset = records[2].dataset = "other";
  CHECK_THROWS_AS(standardize_metrics(records, Metric::leaves, true),
                  std::runtime_error);

  // degenerate baseline spread flags the dataset unusable
  std::vector<RunRecord> flat = {rec("d", Method::c45, 0, 0, 7),
                                 rec("d", Method::c45, 0, 1, 7),
                                 rec("d", Method::ss, 0, 0, 9)};
  std::vector<double> zf = standardize_metrics(flat, Metric::leaves, true);
  CHECK(std::isnan(zf[0]));
  CHECK(std::isnan(zf[2]));
}

TEST_CASE("signed-rank test equals full sign enumeration") {
  RngStream rng(83);
  int tested = 0;
  while (tested < 50) {
    std::size_t n = 6 + rng.below(7);  // up to 12 pairs
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.below(7));
      b[i] = static_cast<double>(rng.below(7));
    }
    int nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) nonzero += a[i] != b[i];
    if (nonzero < 5) continue;
    ++tested;

    WilcoxonResult got = wilcoxon_signed_rank(a, b);
    WilcoxonResult want = wilcoxon_enumeration(a, b);
    CHECK(got.n == want.n);
    CHECK(got.w == doctest::Approx(want.w).epsilon(1e-12));
    CHECK(got.p == doctest::Approx(want.p).epsilon(1e-12));

    WilcoxonResult swapped = wilcoxon_signed_rank(b, a);
    CHECK(swapped.w == got.w);
    CHECK(swapped.p == got.p);
  }
}

TEST_CASE("signed-rank test edge cases") {
  // all positive differences, no ties: W = 0, p = 2 * (1/2^5)
  std::vector<double> a = {5, 7, 9, 12, 20};
  std::vector<double> b = {1, 2, 3, 4, 5};
  WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.w == 0.0);
  CHECK(r.n == 5);
  CHECK(r.p == doctest::Approx(0.0625).epsilon(1e-12));

  std::vector<double> equal = {1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(wilcoxon_signed_rank(equal, equal), std::runtime_error);

  std::vector<double> short_b = {1, 2};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, short_b), std::invalid_argument);

  // large samples switch to the tie-corrected normal approximation
  RngStream rng(84);
  std::vector<double> big_a(40), big_b(40);
  for (int i = 0; i < 40; ++i) {
    big_a[i] = rng.normal() + 0.4;
    big_b[i] = rng.normal();
  }
  WilcoxonResult big = wilcoxon_signed_rank(big_a, big_b);
  CHECK(big.n == 40);
  CHECK(big.p > 0.0);
  CHECK(big.p <= 1.0);
}

TEST_CASE("two-point closed forms match an independent evaluation") {
  for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (double x_t : {0.5, 1.0, 2.0}) {
      double p_d_neg = phi(4.0 / (2.0 * sigma));
      double pc_train = phi(x_t * std::sqrt(2.0) / sigma);
      double pc_both = phi(x_t * std::sqrt(2.0) / (std::sqrt(3.0) * sigma));

      double want_train = p_d_neg * (1 - pc_train) + (1 - p_d_neg) * pc_train;
      double want_both = p_d_neg * (1 - pc_both) + (1 - p_d_neg) * pc_both;
      CHECK(std::fabs(toy_misclassification_prob(sigma, x_t,
                                                 ToyMode::train_uncertain) -
                      want_train) < 1e-12);
      CHECK(std::fabs(toy_misclassification_prob(sigma, x_t,
                                                 ToyMode::both_uncertain) -
                      want_both) < 1e-12);
    }
  }
  // vanishing noise classifies perfectly
  CHECK(toy_misclassification_prob(1e-9, 1.0, ToyMode::train_uncertain) <
        1e-12);
  CHECK_THROWS_AS(toy_misclassification_prob(0.0, 1.0, ToyMode::both_uncertain),
                  std::invalid_argument);
}

TEST_CASE("two-point Monte-Carlo tracks the closed form") {
  for (ToyMode mode : {ToyMode::train_uncertain, ToyMode::both_uncertain}) {
    RngStream rng(85);
    double closed = toy_misclassification_prob(1.0, 1.0, mode);
    double mc = toy_misclassification_mc(1.0, 1.0, mode, 200000, rng);
    CHECK(std::fabs(closed - mc) < 0.01);
  }
}

TEST_CASE("grid tuning returns a grid element deterministically") {
  RngStream data_rng(86);
  Dataset d = synth_guyon(90, 4, 3, 2, 1.0, data_rng);

  std::vector<double> zero = {0.0};
  RngStream r1(5);
  CHECK(cv_tune_parameter(d, Method::ss, zero, NoiseSide::train_folds, 0.2,
                          0.25, 3, 100, true, r1) == 0.0);

  std::vector<double> grid = {0.0, 0.1, 0.3};
  RngStream r2(5), r3(5);
  double u1 = cv_tune_parameter(d, Method::ss, grid, NoiseSide::train_folds,
                                0.2, 0.25, 3, 100, true, r2);
  double u2 = cv_tune_parameter(d, Method::ss, grid, NoiseSide::train_folds,
                                0.2, 0.25, 3, 100, true, r3);
  CHECK(u1 == u2);
  CHECK(std::count(grid.begin(), grid.end(), u1) == 1);
}

TEST_CASE("experiment grid emits one record per cell, deterministically") {
  std::vector<NamedDataset> datasets = tiny_suite();
  ExperimentPlan plan = tiny_plan();

  ExperimentResult res = run_experiment(plan, datasets);
  CHECK(res.records.size() == 2 * 2 * 2 * 3);  // datasets x noise x methods x perms
  REQUIRE(res.calibrations.size() == 2);
  for (const DatasetCalibration& c : res.calibrations) {
    CHECK(c.confidence >= 1e-4);
    CHECK(c.confidence <= 0.9999);
  }
  for (const RunRecord& r : res.records) {
    CHECK(r.leaves >= 1.0);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.seconds == 0.0);  // timing off
    if (r.method == Method::c45)
      CHECK(std::isnan(r.param));
    else
      CHECK((r.param == 0.0 || r.param == 0.1));
  }

  ExperimentResult res2 = run_experiment(plan, datasets);
  REQUIRE(res2.records.size() == res.records.size());
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    CHECK(res.records[i].dataset == res2.records[i].dataset);
    CHECK(res.records[i].leaves == res2.records[i].leaves);
    CHECK(res.records[i].accuracy == res2.records[i].accuracy);
  }
}

TEST_CASE("worker count does not change the records") {
  std::vector<NamedDataset> datasets = tiny_suite();
  ExperimentPlan plan = tiny_plan();
  ExperimentResult serial = run_experiment(plan, datasets);
  plan.jobs = 3;
  ExperimentResult pooled = run_experiment(plan, datasets);
  REQUIRE(serial.records.size() == pooled.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].leaves == pooled.records[i].leaves);
    CHECK(serial.records[i].accuracy == pooled.records[i].accuracy);
  }
}

TEST_CASE("the two experiment protocols coincide at zero noise") {
  std::vector<NamedDataset> datasets = tiny_suite();
  ExperimentPlan plan = tiny_plan();
  plan.noise_factors = {0.0};
  plan.methods = {Method::c45, Method::ss, Method::stp, Method::se};

  ExperimentResult one = run_experiment1(plan, datasets);
  ExperimentResult two = run_experiment2(plan, datasets);
  REQUIRE(one.records.size() == two.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    const RunRecord& a = one.records[i];
    const RunRecord& b = two.records[i];
    CHECK(a.dataset == b.dataset);
    CHECK(a.method == b.method);
    CHECK(a.leaves == b.leaves);
    CHECK(a.accuracy == b.accuracy);
    bool param_equal =
        (std::isnan(a.param) && std::isnan(b.param)) || a.param == b.param;
    CHECK(param_equal);
  }
}

TEST_CASE("summaries standardize against plain C4.5 at zero noise") {
  std::vector<NamedDataset> datasets = tiny_suite();
  ExperimentPlan plan = tiny_plan();
  plan.permutations = 6;
  ExperimentResult res = run_experiment(plan, datasets);

  std::vector<SummaryRow> rows = summarize_records(res.records, true);
  REQUIRE(rows.size() == 4);  // 2 methods x 2 noise levels
  const SummaryRow* base = nullptr;
  for (const SummaryRow& r : rows)
    if (r.method == Method::c45 && r.noise == 0.0) base = &r;
  REQUIRE(base != nullptr);
  // The baseline standardizes itself to zero mean; a constant-leaf baseline
  // has no spread to standardize by and surfaces as NaN instead.
  CHECK((std::isnan(base->mean_leaves_z) ||
         std::fabs(base->mean_leaves_z) < 1e-9));
  CHECK(std::fabs(base->mean_accuracy_z) < 1e-9);
  CHECK(std::isnan(base->p_leaves));
  for (const SummaryRow& r : rows)
    if (r.method == Method::se) CHECK(r.pairs == 12);  // 2 datasets x 6 perms
}

TEST_CASE("records CSV round trips including missing params") {
  std::vector<NamedDataset> datasets = tiny_suite();
  ExperimentPlan plan = tiny_plan();
  ExperimentResult res = run_experiment(plan, datasets);

  std::string p = temp_path("st_records.csv");
  write_records_csv(p, res.records);
  std::vector<RunRecord> back = read_records_csv(p);
  std::remove(p.c_str());

  REQUIRE(back.size() == res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const RunRecord& a = res.records[i];
    const RunRecord& b = back[i];
    CHECK(a.dataset == b.dataset);
    CHECK(method_name(a.method) == method_name(b.method));
    CHECK(a.noise == b.noise);
    CHECK(a.permutation == b.permutation);
    CHECK(a.leaves == b.leaves);
    CHECK(std::fabs(a.accuracy - b.accuracy) <= 5e-7);  // %.6f column
    bool param_equal =
        (std::isnan(a.param) && std::isnan(b.param)) || a.param == b.param;
    CHECK(param_equal);
  }
}

TEST_CASE("summary and plot files are written with stable headers") {
  std::vector<RunRecord> records;
  RngStream rng(87);
  for (int perm = 0; perm < 6; ++perm) {
    for (Method m : {Method::c45, Method::stp}) {
      for (double noise : {0.0, 0.3}) {
        RunRecord r;
        r.dataset = "d";
        r.method = m;
        r.noise = noise;
        r.permutation = perm;
        r.leaves = 10 + perm + (m == Method::stp ? -2 : 0) + 3 * noise;
        r.accuracy = 0.8 - 0.2 * noise + 0.01 * perm;
        r.param = m == Method::stp ? 0.1 : std::nan("");
        records.push_back(r);
      }
    }
  }
  std::vector<SummaryRow> rows = summarize_records(records, true);

  std::string sp = temp_path("st_summary.csv");
  std::string pp = temp_path("st_plot.csv");
  write_summary_csv(sp, rows);
  write_plot_csv(pp, rows, Metric::accuracy);

  std::ifstream sf(sp), pf(pp);
  std::string line;
  std::getline(sf, line);
  CHECK(line ==
        "method,noise,mean_leaves_z,mean_accuracy_z,p_leaves,p_accuracy,pairs");
  int data_lines = 0;
  while (std::getline(sf, line)) ++data_lines;
  CHECK(data_lines == static_cast<int>(rows.size()));

  std::getline(pf, line);
  CHECK(line == "noise,c45,stp");
  std::getline(pf, line);
  CHECK(line.substr(0, 2) == "0,");
  std::remove(sp.c_str());
  std::remove(pp.c_str());
}

TEST_CASE("confidence sweep grows once and prunes per factor") {
  RngStream data_rng(88);
  Dataset d = synth_guyon(200, 5, 4, 2, 1.0, data_rng);
  RngStream split_rng(89);
  SplitPair sp = stratified_split(d, 0.7, split_rng);

  std::vector<Method> methods = {Method::c45, Method::stp};
  std::vector<double> u_values = {0.0, 0.1};
  std::vector<double> confidences = {1e-4, 0.25, 0.9999};
  RngStream rng(90);
  std::vector<SweepRow> rows =
      confidence_sweep(sp.train, sp.test, methods, confidences, u_values, 0.0,
                       100, rng);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].confidence == 1e-4);
  CHECK(rows[5].confidence == 0.9999);

  auto leaves_at = [&](Method m, double c) {
    for (const SweepRow& r : rows)
      if (r.method == m && r.confidence == c) return r.leaves;
    return -1.0;
  };
  CHECK(leaves_at(Method::c45, 1e-4) <= leaves_at(Method::c45, 0.9999));
  for (const SweepRow& r : rows) {
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.leaves >= 1.0);
  }

  std::vector<double> wrong_len = {0.0};
  RngStream rng2(90);
  CHECK_THROWS_AS(confidence_sweep(sp.train, sp.test, methods, confidences,
                                   wrong_len, 0.0, 100, rng2),
                  std::invalid_argument);
}
