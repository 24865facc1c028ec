#include "softtree/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace softtree {

namespace {

// Feature shift applied after generation. Without it the column means sit
// near zero and every mean-relative noise scale degenerates.
constexpr double kFeatureShift = 3.0;

// Random rotation (orthonormal basis) of dimension d via Gram-Schmidt over
// standard-normal draws. Rows are the basis vectors.
std::vector<double> random_rotation(std::size_t d, RngStream& rng) {
  std::vector<double> q(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 64)
        throw std::runtime_error("random_rotation: degenerate draws");
      for (std::size_t k = 0; k < d; ++k) q[i * d + k] = rng.normal();
      for (std::size_t p = 0; p < i; ++p) {
        double dot = 0;
        for (std::size_t k = 0; k < d; ++k) dot += q[i * d + k] * q[p * d + k];
        for (std::size_t k = 0; k < d; ++k) q[i * d + k] -= dot * q[p * d + k];
      }
      double norm = 0;
      for (std::size_t k = 0; k < d; ++k) norm += q[i * d + k] * q[i * d + k];
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (std::size_t k = 0; k < d; ++k) q[i * d + k] /= norm;
        break;
      }
    }
  }
  return q;
}

}  // namespace

Dataset synth_guyon(std::size_t n_samples, std::size_t n_features,
                    std::size_t n_informative, int n_classes, double class_sep,
                    RngStream& rng) {
  if (n_samples == 0 || n_features == 0)
    throw std::invalid_argument("synth_guyon: empty shape");
  if (n_informative == 0 || n_informative > n_features)
    throw std::invalid_argument(
        "synth_guyon: n_informative must be in [1, n_features]");
  if (n_classes < 2) throw std::invalid_argument("synth_guyon: need >= 2 classes");
  if (n_informative < 64 &&
      static_cast<std::size_t>(n_classes) > (std::size_t{1} << n_informative))
    throw std::invalid_argument("synth_guyon: not enough hypercube vertices");

  // Class centroids: vertex coordinates read off the class id's bits.
  std::vector<double> centroids(static_cast<std::size_t>(n_classes) *
                                n_informative);
  for (int c = 0; c < n_classes; ++c)
    for (std::size_t k = 0; k < n_informative; ++k)
      centroids[c * n_informative + k] =
          ((static_cast<std::size_t>(c) >> k) & 1) ? class_sep : -class_sep;

  std::vector<double> rot = random_rotation(n_informative, rng);

  Dataset data;
  data.attributes.resize(n_features);
  for (std::size_t j = 0; j < n_features; ++j)
    data.attributes[j] = {"f" + std::to_string(j), static_cast<int>(j)};
  for (int c = 0; c < n_classes; ++c)
    data.class_names.push_back(std::to_string(c));
  data.values.resize(n_samples * n_features);
  data.labels.resize(n_samples);

  std::vector<double> point(n_informative);
  for (std::size_t i = 0; i < n_samples; ++i) {
    int c = static_cast<int>(i % static_cast<std::size_t>(n_classes));
    data.labels[i] = c;
    for (std::size_t k = 0; k < n_informative; ++k)
      point[k] = centroids[c * n_informative + k] + rng.normal();
    for (std::size_t k = 0; k < n_informative; ++k) {
      double v = 0;
      for (std::size_t m = 0; m < n_informative; ++m)
        v += rot[k * n_informative + m] * point[m];
      data.at(i, k) = v + kFeatureShift;
    }
    for (std::size_t k = n_informative; k < n_features; ++k)
      data.at(i, k) = rng.normal() + kFeatureShift;
  }
  return data;
}

std::vector<NamedDataset> synth_suite(const RngStream& rng) {
  struct Shape {
    std::size_t rows, features;
    int classes;
  };
  const Shape shapes[] = {
      {500, 15, 2}, {400, 15, 2}, {300, 20, 2}, {200, 25, 3}, {250, 20, 3}};
  std::vector<NamedDataset> out;
  std::uint64_t idx = 1;
  for (const Shape& s : shapes) {
    RngStream child = rng.derive({0x53594E5448ull /* "SYNTH" */, idx});
    std::size_t informative = (2 * s.features + 2) / 3;  // ceil(2/3 * f)
    out.push_back({"synth" + std::to_string(idx),
                   synth_guyon(s.rows, s.features, informative, s.classes, 1.0,
                               child)});
    ++idx;
  }
  return out;
}

}  // namespace softtree
