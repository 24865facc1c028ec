#include "softtree/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softtree {

namespace {

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

[[noreturn]] void bad_model(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) +
                           ": bad model file: " + what);
}

const char* mode_name(SearchMode m) {
  return m == SearchMode::soft ? "soft" : "hard";
}
const char* mode_name(PropagationMode m) {
  return m == PropagationMode::soft ? "soft" : "hard";
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  if (!model.tree) throw std::runtime_error("save_model: empty tree");
  if (model.means.size() != model.attributes.size())
    throw std::runtime_error("save_model: means/attributes size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "softtree model 1\n";
  for (const auto& name : model.class_names) out << "class " << name << "\n";
  for (std::size_t j = 0; j < model.attributes.size(); ++j)
    out << "attr " << j << " mean " << g9(model.means[j]) << " name "
        << model.attributes[j].name << "\n";
  out << "search " << mode_name(model.search) << " u " << g9(model.u_search)
      << "\n";
  out << "propagation " << mode_name(model.propagation) << " u "
      << g9(model.u_propagation) << "\n";
  out << "confidence " << g9(model.confidence) << "\n";
  out << "tree\n";
  out << serialize_tree(*model.tree);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Model model;
  std::string line;
  std::size_t lineno = 0;

  auto next_line = [&](bool required) {
    if (!std::getline(in, line)) {
      if (required) bad_model(path, lineno + 1, "unexpected end of file");
      return false;
    }
    ++lineno;
    return true;
  };

  next_line(true);
  if (line != "softtree model 1") bad_model(path, lineno, "unrecognized header");

  bool saw_tree = false;
  while (next_line(false)) {
    if (line == "tree") {
      saw_tree = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "class") {
      std::string name;
      std::getline(ls >> std::ws, name);
      if (name.empty()) bad_model(path, lineno, "class without a name");
      model.class_names.push_back(name);
    } else if (kind == "attr") {
      std::size_t idx;
      std::string kw_mean, kw_name, name;
      double mean;
      if (!(ls >> idx >> kw_mean >> mean >> kw_name) || kw_mean != "mean" ||
          kw_name != "name")
        bad_model(path, lineno, "malformed attr line");
      std::getline(ls >> std::ws, name);
      if (name.empty()) bad_model(path, lineno, "attr without a name");
      if (idx != model.attributes.size())
        bad_model(path, lineno, "attr index out of order");
      model.attributes.push_back({name, static_cast<int>(idx)});
      model.means.push_back(mean);
    } else if (kind == "search" || kind == "propagation") {
      std::string mode, kw_u;
      double u;
      if (!(ls >> mode >> kw_u >> u) || kw_u != "u" ||
          (mode != "hard" && mode != "soft"))
        bad_model(path, lineno, "malformed " + kind + " line");
      if (kind == "search") {
        model.search = mode == "soft" ? SearchMode::soft : SearchMode::hard;
        model.u_search = u;
      } else {
        model.propagation =
            mode == "soft" ? PropagationMode::soft : PropagationMode::hard;
        model.u_propagation = u;
      }
    } else if (kind == "confidence") {
      if (!(ls >> model.confidence))
        bad_model(path, lineno, "malformed confidence line");
    } else {
      bad_model(path, lineno, "unknown directive '" + kind + "'");
    }
  }
  if (!saw_tree) bad_model(path, lineno, "missing tree section");
  if (model.class_names.empty()) bad_model(path, lineno, "no classes declared");
  if (model.attributes.empty()) bad_model(path, lineno, "no attributes declared");

  std::ostringstream tree_text;
  tree_text << in.rdbuf();
  try {
    model.tree = parse_tree(tree_text.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": bad tree section: " + e.what());
  }
  return model;
}

EvalConfig model_eval_config(const Model& model, PropagationMode mode,
                             double u_eval) {
  EvalConfig cfg;
  cfg.mode = mode;
  cfg.u_eval = u_eval;
  cfg.means = model.means;
  return cfg;
}

void check_model_compatible(const Model& model, const Dataset& data) {
  if (data.cols() != model.attributes.size())
    throw std::runtime_error(
        "attribute count mismatch: model has " +
        std::to_string(model.attributes.size()) + ", data has " +
        std::to_string(data.cols()));
  for (std::size_t j = 0; j < data.cols(); ++j)
    if (data.attributes[j].name != model.attributes[j].name)
      throw std::runtime_error("attribute " + std::to_string(j) +
                               " mismatch: model has '" +
                               model.attributes[j].name + "', data has '" +
                               data.attributes[j].name + "'");
}

}  // namespace softtree
