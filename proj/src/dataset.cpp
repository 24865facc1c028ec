#include "softtree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace softtree {

WeightedView full_view(const Dataset& data) {
  WeightedView view(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) view[i] = {i, 1.0};
  return view;
}

double view_weight(const WeightedView& view) {
  long double t = 0;
  for (const auto& e : view) t += e.weight;
  return static_cast<double>(t);
}

ClassHistogram view_histogram(const Dataset& data, const WeightedView& view) {
  ClassHistogram hist(data.class_count());
  for (const auto& e : view) hist.add(data.labels[e.row], e.weight);
  return hist;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t line_no, const std::string& column) {
  if (cell == "?") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": non-numeric value '" + cell + "' in column '" +
                             column + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  std::vector<std::string> header = split_line(line);

  int label_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) label_idx = static_cast<int>(c);
  if (label_idx < 0)
    throw std::runtime_error(path + ": label column '" + label_column +
                             "' not found in header");

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) == label_idx) continue;
    data.attributes.push_back(
        {header[c], static_cast<int>(data.attributes.size())});
  }

  std::map<std::string, int> class_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header.size()));
    const std::string& label = cells[label_idx];
    auto [it, inserted] =
        class_ids.try_emplace(label, static_cast<int>(data.class_names.size()));
    if (inserted) data.class_names.push_back(label);
    data.labels.push_back(it->second);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == label_idx) continue;
      data.values.push_back(parse_cell(cells[c], path, line_no, header[c]));
    }
  }
  if (data.rows() == 0) throw std::runtime_error(path + ": no data rows");
  if (data.class_count() == 1)
    std::cerr << "warning: " << path << ": only one class ('"
              << data.class_names[0] << "') present\n";
  for (std::size_t j = 0; j < data.cols(); ++j) {
    bool any = false;
    for (std::size_t i = 0; i < data.rows() && !any; ++i)
      any = !Dataset::missing(data.at(i, j));
    if (!any)
      throw std::runtime_error(path + ": attribute '" + data.attributes[j].name +
                               "' has no known values");
  }
  return data;
}

namespace {

void print_value(std::ostream& out, double v) {
  if (Dataset::missing(v)) {
    out << '?';
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << buf;
  }
}

}  // namespace

void save_csv(const Dataset& data, const std::string& path,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& attr : data.attributes) out << attr.name << ',';
  out << label_column << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      print_value(out, data.at(i, j));
      out << ',';
    }
    out << data.class_names[data.labels[i]] << '\n';
  }
}

namespace {

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.attributes = data.attributes;
  out.class_names = data.class_names;
  out.values.reserve(rows.size() * data.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(data.labels[r]);
    for (std::size_t j = 0; j < data.cols(); ++j)
      out.values.push_back(data.at(r, j));
  }
  return out;
}

std::vector<std::vector<std::size_t>> rows_by_class(const Dataset& data) {
  std::vector<std::vector<std::size_t>> per_class(data.class_count());
  for (std::size_t i = 0; i < data.rows(); ++i)
    per_class[data.labels[i]].push_back(i);
  return per_class;
}

void shuffle_rows(std::vector<std::size_t>& rows, RngStream& rng) {
  for (std::size_t i = rows.size(); i > 1; --i)
    std::swap(rows[i - 1], rows[rng.below(i)]);
}

}  // namespace

SplitPair stratified_split(const Dataset& data, double train_fraction,
                           RngStream& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::runtime_error("train fraction must be in (0, 1)");
  std::vector<std::size_t> train_rows, test_rows;
  for (auto& rows : rows_by_class(data)) {
    if (rows.size() < 2)
      throw std::runtime_error("stratified split needs at least 2 rows per class");
    shuffle_rows(rows, rng);
    std::size_t k = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(rows.size())));
    k = std::clamp<std::size_t>(k, 1, rows.size() - 1);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + k);
    test_rows.insert(test_rows.end(), rows.begin() + k, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {take_rows(data, train_rows), take_rows(data, test_rows)};
}

std::vector<int> stratified_folds(const Dataset& data, int folds,
                                  RngStream& rng) {
  if (folds < 2) throw std::runtime_error("need at least 2 folds");
  std::vector<int> fold_of(data.rows(), -1);
  int offset = 0;
  for (auto& rows : rows_by_class(data)) {
    if (rows.size() < static_cast<std::size_t>(folds))
      throw std::runtime_error("class with fewer rows than folds");
    shuffle_rows(rows, rng);
    for (std::size_t i = 0; i < rows.size(); ++i)
      fold_of[rows[i]] = static_cast<int>((i + offset) % folds);
    // Stagger the round-robin start so small classes spread over all folds.
    offset = static_cast<int>((offset + rows.size()) % folds);
  }
  return fold_of;
}

SplitPair fold_split(const Dataset& data, const std::vector<int>& fold_of,
                     int fold) {
  std::vector<std::size_t> train_rows, val_rows;
  for (std::size_t i = 0; i < data.rows(); ++i)
    (fold_of[i] == fold ? val_rows : train_rows).push_back(i);
  return {take_rows(data, train_rows), take_rows(data, val_rows)};
}

double attribute_mean(const Dataset& data, std::size_t j) {
  long double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double v = data.at(i, j);
    if (!Dataset::missing(v)) {
      sum += v;
      ++n;
    }
  }
  if (n == 0)
    throw std::runtime_error("attribute '" + data.attributes[j].name +
                             "' has no known values");
  return static_cast<double>(sum / n);
}

double attribute_range(const Dataset& data, std::size_t j) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double v = data.at(i, j);
    if (!Dataset::missing(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi))
    throw std::runtime_error("attribute '" + data.attributes[j].name +
                             "' has no known values");
  return hi - lo;
}

Dataset add_gaussian_noise(const Dataset& data, double factor, RngStream& rng) {
  if (factor < 0.0) throw std::runtime_error("noise factor must be >= 0");
  if (factor == 0.0) return data;
  Dataset out = data;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double sigma = factor * attribute_mean(data, j);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      double v = out.at(i, j);
      if (!Dataset::missing(v)) out.at(i, j) = v + sigma * rng.normal();
    }
  }
  return out;
}

std::vector<ValueGroup> sorted_distinct_values(const Dataset& data,
                                               const WeightedView& view,
                                               std::size_t j) {
  std::vector<ValueSample> samples;
  samples.reserve(view.size());
  for (const auto& e : view) {
    double v = data.at(e.row, j);
    if (!Dataset::missing(v)) samples.push_back({v, e.weight, data.labels[e.row]});
  }
  return group_value_samples(samples, data.class_count());
}

std::vector<ValueGroup> group_value_samples(std::vector<ValueSample>& samples,
                                            int classes) {
  std::sort(samples.begin(), samples.end(),
            [](const ValueSample& a, const ValueSample& b) {
              if (a.value != b.value) return a.value < b.value;
              return a.cls < b.cls;
            });
  std::vector<ValueGroup> groups;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t k = i;
    long double w = 0;
    ValueGroup g;
    g.value = samples[i].value;
    g.class_weights.assign(classes, 0.0);
    std::vector<long double> cw(classes, 0.0L);
    while (k < samples.size() && samples[k].value == g.value) {
      w += samples[k].weight;
      cw[samples[k].cls] += samples[k].weight;
      ++k;
    }
    g.weight = static_cast<double>(w);
    for (int c = 0; c < classes; ++c) g.class_weights[c] = static_cast<double>(cw[c]);
    groups.push_back(std::move(g));
    i = k;
  }
  return groups;
}

}  // namespace softtree
