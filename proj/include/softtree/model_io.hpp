#pragma once

#include <string>
#include <vector>

#include "softtree/predict.hpp"
#include "softtree/tree.hpp"

namespace softtree {

// A trained classifier plus everything evaluation needs without the training
// data: attribute order and frozen means (the scale base for soft
// evaluation), class names, and the training configuration echo.
struct Model {
  std::vector<std::string> class_names;
  std::vector<AttributeMeta> attributes;
  std::vector<double> means;
  SearchMode search = SearchMode::hard;
  double u_search = 0.0;
  PropagationMode propagation = PropagationMode::hard;
  double u_propagation = 0.0;
  double confidence = 0.25;
  TreePtr tree;
};

// Plain-text model file: a header line, class and attribute declarations,
// the configuration echo, and the serialized tree. Numbers are printed at 9
// significant digits; save(load(f)) reproduces the file byte for byte.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Checks a dataset against the model's attribute list (count and names) and
// returns the evaluation config for the requested mode.
EvalConfig model_eval_config(const Model& model, PropagationMode mode,
                             double u_eval);
void check_model_compatible(const Model& model, const Dataset& data);

}  // namespace softtree
