#pragma once

#include <array>
#include <span>
#include <sstream>
#include <string>

#include "simpfact/classifier/model.hpp"
#include "simpfact/metrics.hpp"

namespace simpfact::classifier {

struct ClassMetrics {
  std::size_t n_gold = 0;
  std::size_t n_pred = 0;
  std::size_t true_positive = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool absent = false;  // no gold and no predictions; all scores 0
};

struct EvalReport {
  std::array<ClassMetrics, kClasses> classes{};
  std::array<std::array<std::size_t, kClasses>, kClasses> confusion{};  // [gold][pred]
  std::size_t n_evaluated = 0;
  std::size_t n_excluded = 0;  // undefined or gibberish gold labels

  /// Mean F1 over classes that are not absent.
  double macro_f1() const {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& c : classes) {
      if (c.absent) continue;
      sum += c.f1;
      ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }

  /// Model-selection score: mean of the level-1 and level-2 F1.
  double level12_f1() const { return (classes[1].f1 + classes[2].f1) / 2.0; }
};

inline EvalReport evaluate_predictions(std::span<const int> gold, std::span<const int> pred, std::size_t excluded = 0) {
  if (gold.size() != pred.size()) throw ContractError("gold and prediction counts differ");
  if (gold.empty()) throw ContractError("evaluation on an empty test set");
  EvalReport r;
  r.n_evaluated = gold.size();
  r.n_excluded = excluded;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] > 2 || pred[i] < 0 || pred[i] > 2) throw ContractError("labels must be 0, 1 or 2");
    ++r.confusion[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(pred[i])];
  }
  for (std::size_t c = 0; c < kClasses; ++c) {
    auto& m = r.classes[c];
    for (std::size_t k = 0; k < kClasses; ++k) {
      m.n_gold += r.confusion[c][k];
      m.n_pred += r.confusion[k][c];
    }
    m.true_positive = r.confusion[c][c];
    m.absent = m.n_gold == 0 && m.n_pred == 0;
    m.precision = m.n_pred ? static_cast<double>(m.true_positive) / static_cast<double>(m.n_pred) : 0.0;
    m.recall = m.n_gold ? static_cast<double>(m.true_positive) / static_cast<double>(m.n_gold) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return r;
}

/// Scores `model` on rows whose gold label may be undefined; rows with no
/// majority or a gibberish label are excluded and counted.
inline EvalReport evaluate(const SeverityClassifier& model, std::span<const std::vector<double>> features,
                           std::span<const Outcome> gold) {
  if (features.size() != gold.size()) throw ContractError("feature and label counts differ");
  std::vector<int> g, p;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i] || *gold[i] == Severity::gibberish) {
      ++excluded;
      continue;
    }
    g.push_back(to_int(*gold[i]));
    p.push_back(model.predict(features[i]));
  }
  return evaluate_predictions(g, p, excluded);
}

inline EvalReport evaluate(const SeverityClassifier& model, std::span<const Example> rows) {
  std::vector<int> g, p;
  for (const auto& r : rows) {
    g.push_back(r.label);
    p.push_back(model.predict(r.x));
  }
  return evaluate_predictions(g, p);
}

inline json to_json(const EvalReport& r) {
  json classes = json::object();
  for (std::size_t c = 0; c < kClasses; ++c) {
    const auto& m = r.classes[c];
    classes[std::to_string(c)] = {{"n_gold", m.n_gold},       {"n_pred", m.n_pred}, {"true_positive", m.true_positive},
                                  {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                                  {"status", m.absent ? "absent" : "present"}};
  }
  return {{"classes", classes},
          {"confusion", r.confusion},
          {"n_evaluated", r.n_evaluated},
          {"n_excluded", r.n_excluded},
          {"macro_f1", r.macro_f1()},
          {"level12_f1", r.level12_f1()}};
}

inline std::string to_tsv(const EvalReport& r) {
  std::ostringstream os;
  os << "class\tn_gold\tn_pred\ttrue_positive\tprecision\trecall\tf1\tstatus\n";
  for (std::size_t c = 0; c < kClasses; ++c) {
    const auto& m = r.classes[c];
    os << c << '\t' << m.n_gold << '\t' << m.n_pred << '\t' << m.true_positive << '\t'
       << metrics::format_number(m.precision) << '\t' << metrics::format_number(m.recall) << '\t'
       << metrics::format_number(m.f1) << '\t' << (m.absent ? "absent" : "present") << '\n';
  }
  return os.str();
}

}  // namespace simpfact::classifier
