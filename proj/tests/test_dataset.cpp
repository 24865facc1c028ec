#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "softtree/dataset.hpp"

using namespace softtree;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Dataset tiny_dataset() {
  Dataset d;
  d.attributes = {{"height", 0}, {"width", 1}};
  d.class_names = {"no", "yes"};
  d.values = {1.5, 2.0, 3.25, std::nan(""), 4.0, 0.125, -7.5, 9.0};
  d.labels = {0, 1, 1, 0};
  return d;
}

// Balanced numeric dataset: k-th row has value k on both attributes,
// label k % classes.
Dataset ramp_dataset(int rows, int classes) {
  Dataset d;
  d.attributes = {{"a", 0}, {"b", 1}};
  for (int c = 0; c < classes; ++c) d.class_names.push_back(std::to_string(c));
  for (int i = 0; i < rows; ++i) {
    d.values.push_back(i);
    d.values.push_back(i * 0.5);
    d.labels.push_back(i % classes);
  }
  return d;
}

}  // namespace

TEST_CASE("CSV save/load round trip preserves the table") {
  Dataset d = tiny_dataset();
  std::string p1 = temp_path("st_roundtrip1.csv");
  std::string p2 = temp_path("st_roundtrip2.csv");
  save_csv(d, p1, "class");
  Dataset back = load_csv(p1, "class");

  REQUIRE(back.rows() == d.rows());
  REQUIRE(back.cols() == d.cols());
  CHECK(back.attributes[0].name == "height");
  CHECK(back.attributes[1].name == "width");
  CHECK(back.class_names == d.class_names);
  CHECK(back.labels == d.labels);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (std::isnan(d.values[i]))
      CHECK(std::isnan(back.values[i]));
    else
      CHECK(back.values[i] == d.values[i]);
  }

  // A second save of the loaded table reproduces the file byte for byte.
  save_csv(back, p2, "class");
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("CSV loader reports malformed input with line context") {
  std::string p = temp_path("st_bad.csv");

  auto write = [&](const std::string& text) {
    std::ofstream out(p);
    out << text;
  };

  write("a,b,class\n1,2,yes\n");
  CHECK_THROWS_AS(load_csv(p, "target"), std::runtime_error);

  write("a,b,class\n1,oops,yes\n");
  try {
    load_csv(p, "class");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  write("a,b,class\n1,2\n");
  CHECK_THROWS_AS(load_csv(p, "class"), std::runtime_error);

  write("");
  CHECK_THROWS_AS(load_csv(p, "class"), std::runtime_error);
  std::remove(p.c_str());
}

TEST_CASE("label column position is free and ids follow first appearance") {
  std::string p = temp_path("st_label.csv");
  std::ofstream(p) << "class,x\nb,1\na,2\nb,3\n";
  Dataset d = load_csv(p, "class");
  CHECK(d.class_names == std::vector<std::string>{"b", "a"});
  CHECK(d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.cols() == 1);
  CHECK(d.at(2, 0) == 3.0);
  std::remove(p.c_str());
}

TEST_CASE("stratified split keeps class shares and partitions rows") {
  Dataset d = ramp_dataset(100, 2);
  RngStream rng(5);
  SplitPair sp = stratified_split(d, 0.7, rng);
  CHECK(sp.train.rows() == 70);
  CHECK(sp.test.rows() == 30);

  auto count = [](const Dataset& x, int cls) {
    int n = 0;
    for (int l : x.labels) n += l == cls;
    return n;
  };
  CHECK(count(sp.train, 0) == 35);
  CHECK(count(sp.train, 1) == 35);

  // Every original row appears exactly once across the two sides (the first
  // attribute is a unique row id).
  std::multiset<double> seen;
  for (std::size_t i = 0; i < sp.train.rows(); ++i)
    seen.insert(sp.train.at(i, 0));
  for (std::size_t i = 0; i < sp.test.rows(); ++i) seen.insert(sp.test.at(i, 0));
  CHECK(seen.size() == 100);
  CHECK(*seen.begin() == 0.0);
  CHECK(*seen.rbegin() == 99.0);

  Dataset small = ramp_dataset(3, 3);  // one row in one class
  RngStream r2(1);
  CHECK_THROWS_AS(stratified_split(small, 0.7, r2), std::runtime_error);
}

TEST_CASE("different permutation seeds give different splits") {
  Dataset d = ramp_dataset(60, 2);
  RngStream a(1), b(2);
  SplitPair sa = stratified_split(d, 0.7, a);
  SplitPair sb = stratified_split(d, 0.7, b);
  bool same = sa.train.values == sb.train.values;
  CHECK_FALSE(same);
}

TEST_CASE("stratified folds balance every class") {
  Dataset d = ramp_dataset(47, 3);
  RngStream rng(9);
  std::vector<int> fold_of = stratified_folds(d, 5, rng);
  REQUIRE(fold_of.size() == d.rows());

  // per class, fold sizes differ by at most one
  for (int cls = 0; cls < 3; ++cls) {
    std::vector<int> sizes(5, 0);
    for (std::size_t i = 0; i < d.rows(); ++i)
      if (d.labels[i] == cls) ++sizes[fold_of[i]];
    int lo = *std::min_element(sizes.begin(), sizes.end());
    int hi = *std::max_element(sizes.begin(), sizes.end());
    CHECK(hi - lo <= 1);
  }

  SplitPair f0 = fold_split(d, fold_of, 0);
  std::size_t in_fold = 0;
  for (int f : fold_of) in_fold += f == 0;
  CHECK(f0.test.rows() == in_fold);
  CHECK(f0.train.rows() == d.rows() - in_fold);

  Dataset tiny = ramp_dataset(8, 2);
  RngStream r2(1);
  CHECK_THROWS_AS(stratified_folds(tiny, 5, r2), std::runtime_error);
}

TEST_CASE("attribute mean and range skip missing cells") {
  Dataset d = tiny_dataset();
  // height column: 1.5, 3.25, 4.0, -7.5 (no missing)
  CHECK(std::fabs(attribute_mean(d, 0) - 0.3125) < 1e-15);
  CHECK(std::fabs(attribute_range(d, 0) - 11.5) < 1e-15);
  // width column: 2.0, ?, 0.125, 9.0
  CHECK(std::fabs(attribute_mean(d, 1) - (11.125 / 3.0)) < 1e-15);
  CHECK(std::fabs(attribute_range(d, 1) - 8.875) < 1e-15);

  Dataset all_missing = tiny_dataset();
  for (std::size_t i = 0; i < all_missing.rows(); ++i)
    all_missing.at(i, 1) = std::nan("");
  CHECK_THROWS_AS(attribute_mean(all_missing, 1), std::runtime_error);
}

TEST_CASE("gaussian noise: factor zero is the identity, no draws consumed") {
  Dataset d = ramp_dataset(20, 2);
  RngStream rng(4);
  std::uint64_t before = RngStream(4).next_u64();
  Dataset same = add_gaussian_noise(d, 0.0, rng);
  CHECK(same.values == d.values);
  CHECK(rng.next_u64() == before);  // generator untouched
  CHECK_THROWS_AS(add_gaussian_noise(d, -0.1, rng), std::runtime_error);
}

TEST_CASE("gaussian noise scale follows factor times the column mean") {
  Dataset d;
  d.attributes = {{"x", 0}};
  d.class_names = {"0", "1"};
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    d.values.push_back(10.0);  // column mean exactly 10
    d.labels.push_back(i % 2);
  }
  d.at(7, 0) = std::nan("");
  RngStream rng(12);
  Dataset noisy = add_gaussian_noise(d, 0.3, rng);
  CHECK(std::isnan(noisy.at(7, 0)));  // missing stays missing
  CHECK(noisy.labels == d.labels);

  long double sum = 0, sum2 = 0;
  int m = 0;
  for (std::size_t i = 0; i < noisy.rows(); ++i) {
    if (std::isnan(noisy.at(i, 0))) continue;
    double delta = noisy.at(i, 0) - 10.0;
    sum += delta;
    sum2 += delta * delta;
    ++m;
  }
  double mean = static_cast<double>(sum / m);
  double sd = std::sqrt(static_cast<double>(sum2 / m) - mean * mean);
  CHECK(std::fabs(mean) < 0.2);      // 4 sigma of the sample mean
  CHECK(std::fabs(sd - 3.0) < 0.25); // sigma = 0.3 * 10
}

TEST_CASE("sorted distinct values merge duplicates and skip missing") {
  Dataset d;
  d.attributes = {{"x", 0}};
  d.class_names = {"0", "1"};
  d.values = {2.0, 1.0, 2.0, std::nan(""), 1.0, 5.0};
  d.labels = {0, 1, 1, 0, 1, 0};
  WeightedView view = full_view(d);
  view[4].weight = 0.25;  // fractional tuple

  std::vector<ValueGroup> g = sorted_distinct_values(d, view, 0);
  REQUIRE(g.size() == 3);
  CHECK(g[0].value == 1.0);
  CHECK(g[0].weight == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(g[0].class_weights[1] == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(g[1].value == 2.0);
  CHECK(g[1].weight == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g[1].class_weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[2].value == 5.0);

  // the explicit-sample grouping agrees
  std::vector<ValueSample> samples = {{2.0, 1.0, 0}, {1.0, 1.0, 1},
                                      {2.0, 1.0, 1}, {1.0, 0.25, 1},
                                      {5.0, 1.0, 0}};
  std::vector<ValueGroup> g2 = group_value_samples(samples, 2);
  REQUIRE(g2.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g2[i].value == g[i].value);
    CHECK(g2[i].weight == doctest::Approx(g[i].weight).epsilon(1e-12));
  }
}

TEST_CASE("view histogram accumulates fractional weights") {
  Dataset d = ramp_dataset(6, 2);
  WeightedView view = full_view(d);
  view[0].weight = 0.5;
  ClassHistogram h = view_histogram(d, view);
  CHECK(h.counts[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(h.counts[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(view_weight(view) == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(h.majority() == 1);

  ClassHistogram tie(2);
  tie.add(0, 1.0);
  tie.add(1, 1.0);
  CHECK(tie.majority() == 0);  // ties resolve to the smaller id
}
