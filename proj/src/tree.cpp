#include "softtree/tree.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "softtree/stats.hpp"

namespace softtree {

double gating_weight(double x, double tau, double sigma,
                     double missing_left_fraction) {
  if (Dataset::missing(x)) return missing_left_fraction;
  if (sigma <= 0.0) return x < tau ? 1.0 : 0.0;
  return normal_cdf((tau - x) / sigma);
}

PartitionResult partition(const Dataset& data, const WeightedView& view,
                          int attribute, double threshold, double sigma) {
  // First pass: gates and branch proportions over the known values.
  std::vector<double> gate(view.size(), 0.0);
  long double known_left = 0, known_right = 0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    double x = data.at(view[i].row, attribute);
    if (Dataset::missing(x)) {
      gate[i] = -1.0;
      continue;
    }
    double g = gating_weight(x, threshold, sigma, 0.0);
    gate[i] = g;
    known_left += view[i].weight * g;
    known_right += view[i].weight * (1.0 - g);
  }
  long double known = known_left + known_right;
  double miss_left = known > 0 ? static_cast<double>(known_left / known) : 0.5;

  PartitionResult out;
  long double wl = 0, wr = 0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    double g = gate[i] < 0 ? miss_left : gate[i];
    double to_left = view[i].weight * g;
    double to_right = view[i].weight * (1.0 - g);
    if (to_left >= kMinPartitionWeight) {
      out.left.push_back({view[i].row, to_left});
      wl += to_left;
    }
    if (to_right >= kMinPartitionWeight) {
      out.right.push_back({view[i].row, to_right});
      wr += to_right;
    }
  }
  out.left_weight = static_cast<double>(wl);
  out.right_weight = static_cast<double>(wr);
  return out;
}

std::vector<double> attribute_means(const Dataset& data) {
  std::vector<double> means(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j) means[j] = attribute_mean(data, j);
  return means;
}

std::vector<double> sigma_per_attribute(const Dataset& data,
                                        const std::vector<double>& means,
                                        double u, bool quiet,
                                        const char* role) {
  std::vector<double> sigma(data.cols(), 0.0);
  if (u <= 0.0) return sigma;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (means[j] > 0.0) {
      sigma[j] = u * means[j];
    } else if (!quiet) {
      std::cerr << "warning: attribute '" << data.attributes[j].name
                << "' has nonpositive mean; " << role
                << " falls back to hard behavior for it\n";
    }
  }
  return sigma;
}

namespace {

struct GrowContext {
  const Dataset& data;
  const GrowConfig& cfg;
  std::vector<double> sigma_search;
  std::vector<double> sigma_prop;
  GrowStats* stats;
};

TreePtr make_leaf(const GrowContext& ctx, const WeightedView& view) {
  auto node = std::make_unique<TreeNode>();
  node->histogram = view_histogram(ctx.data, view);
  int k = ctx.data.class_count();
  double total = node->histogram.total();
  node->probs.resize(k);
  for (int y = 0; y < k; ++y)
    node->probs[y] = (node->histogram.counts[y] + 1.0) / (total + k);
  return node;
}

TreePtr grow_node(const GrowContext& ctx, const WeightedView& view, int depth) {
  ClassHistogram hist = view_histogram(ctx.data, view);
  double total = hist.total();
  double top = hist.counts[hist.majority()];
  if (total <= 0 || top >= ctx.cfg.purity * total ||
      (ctx.cfg.max_depth >= 0 && depth >= ctx.cfg.max_depth))
    return make_leaf(ctx, view);

  std::uint64_t* evals = nullptr;
  if (ctx.stats) {
    if (ctx.stats->gain_evals_per_depth.size() <= static_cast<std::size_t>(depth))
      ctx.stats->gain_evals_per_depth.resize(depth + 1, 0);
    evals = &ctx.stats->gain_evals_per_depth[depth];
  }
  std::optional<SplitCandidate> split =
      ctx.cfg.split_override
          ? ctx.cfg.split_override(view, depth, evals)
          : best_split_all_attributes(ctx.data, view, ctx.sigma_search,
                                      ctx.cfg.soft, evals);
  if (!split) return make_leaf(ctx, view);

  PartitionResult part = partition(ctx.data, view, split->attribute,
                                   split->threshold,
                                   ctx.sigma_prop[split->attribute]);
  if (part.left_weight < ctx.cfg.min_branch_weight ||
      part.right_weight < ctx.cfg.min_branch_weight)
    return make_leaf(ctx, view);

  auto node = std::make_unique<TreeNode>();
  node->attribute = split->attribute;
  node->threshold = split->threshold;
  node->left_weight = part.left_weight;
  node->right_weight = part.right_weight;
  node->left = grow_node(ctx, part.left, depth + 1);
  node->right = grow_node(ctx, part.right, depth + 1);
  return node;
}

}  // namespace

TreePtr grow_tree(const Dataset& train, const GrowConfig& cfg,
                  GrowStats* stats) {
  if (train.rows() == 0) throw std::runtime_error("cannot grow on empty data");
  std::vector<double> means = attribute_means(train);
  GrowContext ctx{train, cfg, {}, {}, stats};
  ctx.sigma_search = sigma_per_attribute(
      train, means, cfg.search == SearchMode::soft ? cfg.u_search : 0.0,
      cfg.quiet, "search");
  ctx.sigma_prop = sigma_per_attribute(
      train, means,
      cfg.propagation == PropagationMode::soft ? cfg.u_propagation : 0.0,
      cfg.quiet, "propagation");
  return grow_node(ctx, full_view(train), 0);
}

std::size_t tree_leaf_count(const TreeNode& tree) {
  if (tree.is_leaf()) return 1;
  return tree_leaf_count(*tree.left) + tree_leaf_count(*tree.right);
}

std::size_t tree_depth(const TreeNode& tree) {
  if (tree.is_leaf()) return 0;
  return 1 + std::max(tree_depth(*tree.left), tree_depth(*tree.right));
}

TreePtr clone_tree(const TreeNode& tree) {
  auto node = std::make_unique<TreeNode>();
  *node = TreeNode{tree.attribute, tree.threshold, tree.left_weight,
                   tree.right_weight,  nullptr,       nullptr,
                   tree.histogram,     tree.probs};
  if (!tree.is_leaf()) {
    node->left = clone_tree(*tree.left);
    node->right = clone_tree(*tree.right);
  }
  return node;
}

namespace {

void format_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

void serialize_node(const TreeNode& node, int depth, std::string& out) {
  out.append(2 * depth, ' ');
  if (node.is_leaf()) {
    out += "leaf counts=";
    for (std::size_t y = 0; y < node.histogram.counts.size(); ++y) {
      if (y) out += ',';
      format_number(out, node.histogram.counts[y]);
    }
    out += " probs=";
    for (std::size_t y = 0; y < node.probs.size(); ++y) {
      if (y) out += ',';
      format_number(out, node.probs[y]);
    }
    out += '\n';
  } else {
    out += "split a=";
    out += std::to_string(node.attribute);
    out += " tau=";
    format_number(out, node.threshold);
    out += " wl=";
    format_number(out, node.left_weight);
    out += " wr=";
    format_number(out, node.right_weight);
    out += '\n';
    serialize_node(*node.left, depth + 1, out);
    serialize_node(*node.right, depth + 1, out);
  }
}

struct LineCursor {
  std::vector<std::pair<int, std::string>> lines;  // (depth, content)
  std::size_t next = 0;
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::string field_after(const std::string& line, const std::string& key) {
  std::size_t at = line.find(key);
  if (at == std::string::npos)
    throw std::runtime_error("tree text: missing field '" + key + "'");
  at += key.size();
  std::size_t end = line.find(' ', at);
  return line.substr(at, end == std::string::npos ? end : end - at);
}

TreePtr parse_node(LineCursor& cur, int depth) {
  if (cur.next >= cur.lines.size())
    throw std::runtime_error("tree text: unexpected end");
  auto& [d, line] = cur.lines[cur.next];
  if (d != depth) throw std::runtime_error("tree text: bad indentation");
  ++cur.next;
  auto node = std::make_unique<TreeNode>();
  if (line.rfind("split ", 0) == 0) {
    node->attribute = std::stoi(field_after(line, "a="));
    node->threshold = std::stod(field_after(line, "tau="));
    node->left_weight = std::stod(field_after(line, "wl="));
    node->right_weight = std::stod(field_after(line, "wr="));
    node->left = parse_node(cur, depth + 1);
    node->right = parse_node(cur, depth + 1);
  } else if (line.rfind("leaf ", 0) == 0) {
    node->histogram.counts = parse_list(field_after(line, "counts="));
    node->probs = parse_list(field_after(line, "probs="));
  } else {
    throw std::runtime_error("tree text: unknown node kind in '" + line + "'");
  }
  return node;
}

}  // namespace

std::string serialize_tree(const TreeNode& tree) {
  std::string out;
  serialize_node(tree, 0, out);
  return out;
}

TreePtr parse_tree(const std::string& text) {
  LineCursor cur;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    int depth = 0;
    std::size_t i = 0;
    while (i + 1 < line.size() && line[i] == ' ' && line[i + 1] == ' ') {
      i += 2;
      ++depth;
    }
    cur.lines.emplace_back(depth, line.substr(i));
  }
  if (cur.lines.empty()) throw std::runtime_error("tree text: empty");
  TreePtr root = parse_node(cur, 0);
  if (cur.next != cur.lines.size())
    throw std::runtime_error("tree text: trailing lines");
  return root;
}

}  // namespace softtree
