#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "simpfact/classifier/features.hpp"
#include "simpfact/corpus.hpp"
#include "simpfact/error.hpp"
#include "simpfact/types.hpp"

namespace simpfact::classifier {

using json = nlohmann::json;

inline constexpr std::size_t kClasses = 3;
using ClassArray = std::array<double, kClasses>;

/// A labeled feature row; `label` is a severity level 0..2.
struct Example {
  std::vector<double> x;
  int label = 0;
};

/// Per-dimension z-normalisation. Zero-variance dimensions get scale 1.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Normalizer fit(std::span<const Example> rows, std::size_t dim) {
    Normalizer n{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
    if (rows.empty()) return n;
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) n.mean[j] += r.x[j];
    }
    for (auto& m : n.mean) m /= static_cast<double>(rows.size());
    std::vector<double> var(dim, 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) var[j] += (r.x[j] - n.mean[j]) * (r.x[j] - n.mean[j]);
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double sd = std::sqrt(var[j] / static_cast<double>(rows.size()));
      n.scale[j] = sd > 0 ? sd : 1.0;
    }
    return n;
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / scale[j];
    return z;
  }
};

/// Class weights (row-major, kClasses × dim) and biases.
struct Parameters {
  std::size_t dim = 0;
  std::vector<double> weights;
  ClassArray bias{};

  static Parameters zeros(std::size_t dim) { return {dim, std::vector<double>(kClasses * dim, 0.0), {}}; }

  ClassArray logits(std::span<const double> z) const {
    ClassArray out = bias;
    for (std::size_t c = 0; c < kClasses; ++c) {
      for (std::size_t j = 0; j < dim; ++j) out[c] += weights[c * dim + j] * z[j];
    }
    return out;
  }

  bool operator==(const Parameters&) const = default;
};

inline ClassArray softmax(const ClassArray& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  ClassArray p;
  double sum = 0;
  for (std::size_t c = 0; c < kClasses; ++c) sum += p[c] = std::exp(logits[c] - m);
  for (auto& v : p) v /= sum;
  return p;
}

/// Index of the largest entry; the lowest index wins ties.
inline int argmax(const ClassArray& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Mean multinomial cross-entropy over normalised rows `z`, and its gradient
/// when `grad` is non-null. Log-probabilities use log-sum-exp.
inline double cross_entropy(const Parameters& p, std::span<const std::vector<double>> z, std::span<const int> labels,
                            Parameters* grad = nullptr) {
  if (z.size() != labels.size()) throw ContractError("row and label counts differ");
  if (z.empty()) throw ContractError("cross-entropy of an empty batch");
  if (grad) *grad = Parameters::zeros(p.dim);
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto lg = p.logits(z[i]);
    const double m = *std::max_element(lg.begin(), lg.end());
    double sum = 0;
    for (double v : lg) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    const auto y = static_cast<std::size_t>(labels[i]);
    loss += lse - lg[y];
    if (!grad) continue;
    for (std::size_t c = 0; c < kClasses; ++c) {
      const double delta = (std::exp(lg[c] - lse) - (c == y ? 1.0 : 0.0)) * inv_n;
      grad->bias[c] += delta;
      for (std::size_t j = 0; j < p.dim; ++j) grad->weights[c * p.dim + j] += delta * z[i][j];
    }
  }
  return loss * inv_n;
}

/// Per-category severity classifier over z-normalised features.
struct SeverityClassifier {
  Category category = Category::insertion;
  std::vector<std::string> feature_names;
  Normalizer norm;
  Parameters params;
  json manifest = json::object();

  std::size_t dim() const { return params.dim; }

  ClassArray probabilities(std::span<const double> x) const {
    if (x.size() != dim()) throw ContractError("feature vector has " + std::to_string(x.size()) + " dimensions, model expects " + std::to_string(dim()));
    return softmax(params.logits(norm.apply(x)));
  }

  int predict(std::span<const double> x) const { return argmax(probabilities(x)); }
};

inline std::vector<std::string> default_feature_names() { return {kFeatureNames.begin(), kFeatureNames.end()}; }

/// Mean cross-entropy of a model on raw rows.
inline double mean_loss(const SeverityClassifier& m, std::span<const Example> rows) {
  std::vector<std::vector<double>> z;
  std::vector<int> y;
  for (const auto& r : rows) {
    z.push_back(m.norm.apply(r.x));
    y.push_back(r.label);
  }
  return cross_entropy(m.params, z, y);
}

inline json to_json(const SeverityClassifier& m) {
  json w = json::array();
  for (std::size_t c = 0; c < kClasses; ++c) {
    w.push_back(std::vector<double>(m.params.weights.begin() + static_cast<long>(c * m.dim()),
                                    m.params.weights.begin() + static_cast<long>((c + 1) * m.dim())));
  }
  return {{"format", "simpfact-severity-classifier/1"},
          {"category", to_string(m.category)},
          {"classes", {0, 1, 2}},
          {"feature_names", m.feature_names},
          {"normalization", {{"mean", m.norm.mean}, {"scale", m.norm.scale}}},
          {"weights", w},
          {"bias", m.params.bias},
          {"manifest", m.manifest}};
}

inline SeverityClassifier classifier_from_json(const json& j) {
  try {
    SeverityClassifier m;
    m.category = category_from_string(j.at("category").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const std::size_t d = m.feature_names.size();
    m.norm.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    m.norm.scale = j.at("normalization").at("scale").get<std::vector<double>>();
    const auto w = j.at("weights").get<std::vector<std::vector<double>>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (m.norm.mean.size() != d || m.norm.scale.size() != d || w.size() != kClasses || b.size() != kClasses) {
      throw ValidationError("model dimensions are inconsistent");
    }
    m.params = Parameters::zeros(d);
    for (std::size_t c = 0; c < kClasses; ++c) {
      if (w[c].size() != d) throw ValidationError("model weight row has the wrong length");
      std::copy(w[c].begin(), w[c].end(), m.params.weights.begin() + static_cast<long>(c * d));
      m.params.bias[c] = b[c];
    }
    for (double s : m.norm.scale) {
      if (!(s > 0)) throw ValidationError("normalization scale must be positive");
    }
    if (auto it = j.find("manifest"); it != j.end()) m.manifest = *it;
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace simpfact::classifier
