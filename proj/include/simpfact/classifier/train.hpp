#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "simpfact/classifier/evaluate.hpp"
#include "simpfact/classifier/model.hpp"
#include "simpfact/io.hpp"
#include "simpfact/perturb/example.hpp"

namespace simpfact::classifier {

struct TrainOptions {
  double step_size = 1.0;  // initial gradient-descent step; halved on non-decrease
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.2;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0;        // training loss after the update
  double step_size = 0;   // step actually taken (0 when no step decreased the loss)
  ClassArray holdout_f1{};
  double score = 0;  // mean of holdout F1 for levels 1 and 2
};

inline json to_json(const EpochLog& e) {
  return {{"epoch", e.epoch}, {"loss", e.loss}, {"step_size", e.step_size}, {"holdout_f1", e.holdout_f1},
          {"score", e.score}};
}

/// Row indices of a stratified train/holdout split. `train_oversampled` is
/// `train` followed by duplicates that equalise the class counts.
struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
  std::vector<std::size_t> train_oversampled;
};

/// Appends duplicates of each minority class, cycling through its members in
/// order, until every present class matches the largest one.
inline std::vector<std::size_t> oversample(std::span<const std::size_t> indices, std::span<const int> labels) {
  std::array<std::vector<std::size_t>, kClasses> by_class;
  for (auto i : indices) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  std::size_t target = 0;
  for (const auto& v : by_class) target = std::max(target, v.size());
  std::vector<std::size_t> out(indices.begin(), indices.end());
  for (const auto& members : by_class) {
    for (std::size_t k = members.size(); !members.empty() && k < target; ++k) out.push_back(members[k % members.size()]);
  }
  return out;
}

/// Per class, a seeded round(n × fraction) of the rows go to the holdout,
/// leaving at least one row of every class in training.
inline DataSplit split_dataset(std::span<const int> labels, double holdout_fraction, std::uint64_t seed) {
  if (holdout_fraction < 0 || holdout_fraction >= 1) throw ContractError("holdout fraction must be in [0, 1)");
  DataSplit s;
  for (std::size_t c = 0; c < kClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == static_cast<int>(c)) members.push_back(i);
    }
    if (members.empty()) continue;
    auto rng = perturb::keyed_rng(seed, "holdout/" + std::to_string(c));
    perturb::portable_shuffle(members, rng);
    auto n_hold = static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * holdout_fraction + 0.5));
    n_hold = std::min(n_hold, members.size() - 1);
    s.holdout.insert(s.holdout.end(), members.begin(), members.begin() + static_cast<long>(n_hold));
    s.train.insert(s.train.end(), members.begin() + static_cast<long>(n_hold), members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  s.train_oversampled = oversample(s.train, labels);
  return s;
}

struct TrainResult {
  SeverityClassifier model;  // best checkpoint
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double initial_loss = 0;     // on the oversampled training rows, before any step
  DataSplit split;

  std::string log_jsonl() const {
    return io::to_jsonl(log, [](const EpochLog& e) { return to_json(e); });
  }
};

/// Full-batch gradient descent on mean cross-entropy over the oversampled
/// training split. Each epoch tries the current step and halves it until the
/// loss strictly decreases; the recorded loss sequence is non-increasing.
/// The returned model is the epoch with the best holdout level-1/2 F1 mean,
/// earliest on ties. With `init`, training starts from its parameters and
/// keeps its normalisation frozen.
inline TrainResult train(Category category, std::span<const Example> data, const TrainOptions& opts,
                         const SeverityClassifier* init = nullptr) {
  if (data.empty()) throw TrainingError("training set is empty");
  if (!(opts.step_size > 0) || !std::isfinite(opts.step_size)) throw ContractError("step size must be positive");
  const std::size_t dim = init ? init->dim() : data.front().x.size();
  std::vector<int> labels;
  for (const auto& r : data) {
    if (r.x.size() != dim) throw ContractError("inconsistent feature dimensions");
    if (r.label < 0 || r.label > 2) throw ContractError("training labels must be 0, 1 or 2");
    for (double v : r.x) {
      if (!std::isfinite(v)) throw ContractError("non-finite feature value");
    }
    labels.push_back(r.label);
  }
  if (std::set<int>(labels.begin(), labels.end()).size() < 2) {
    throw TrainingError("training needs at least two classes");
  }

  TrainResult res;
  res.split = split_dataset(labels, opts.holdout_fraction, opts.seed);
  const auto& tr = res.split.train_oversampled;
  const auto& ho = res.split.holdout.empty() ? res.split.train : res.split.holdout;

  SeverityClassifier model;
  model.category = category;
  if (init) {
    model.feature_names = init->feature_names;
    model.norm = init->norm;
    model.params = init->params;
  } else {
    model.feature_names = dim == kFeatureDim ? default_feature_names() : std::vector<std::string>{};
    if (model.feature_names.empty()) {
      for (std::size_t j = 0; j < dim; ++j) model.feature_names.push_back("f" + std::to_string(j));
    }
    std::vector<Example> fit_rows;
    for (auto i : res.split.train) fit_rows.push_back(data[i]);
    model.norm = Normalizer::fit(fit_rows, dim);
    model.params = Parameters::zeros(dim);
  }

  std::vector<std::vector<double>> z_all;
  for (const auto& r : data) z_all.push_back(model.norm.apply(r.x));
  std::vector<std::vector<double>> z;
  std::vector<int> y;
  for (auto i : tr) {
    z.push_back(z_all[i]);
    y.push_back(labels[i]);
  }
  auto holdout_report = [&](const Parameters& p) {
    std::vector<int> g, pred;
    for (auto i : ho) {
      g.push_back(labels[i]);
      pred.push_back(argmax(p.logits(z_all[i])));
    }
    return evaluate_predictions(g, pred);
  };

  Parameters params = model.params;
  double loss = cross_entropy(params, z, y);
  if (!std::isfinite(loss)) throw DivergenceError(opts.step_size);
  res.initial_loss = loss;
  double step = opts.step_size;
  Parameters best = params;
  double best_score = -1;

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    Parameters grad;
    cross_entropy(params, z, y, &grad);
    double taken = 0;
    for (int attempt = 0; attempt < 60; ++attempt, step /= 2) {
      Parameters trial = params;
      for (std::size_t k = 0; k < trial.weights.size(); ++k) trial.weights[k] -= step * grad.weights[k];
      for (std::size_t c = 0; c < kClasses; ++c) trial.bias[c] -= step * grad.bias[c];
      const double trial_loss = cross_entropy(trial, z, y);
      if (!std::isfinite(trial_loss)) throw DivergenceError(step);
      if (trial_loss < loss) {
        params = std::move(trial);
        loss = trial_loss;
        taken = step;
        break;
      }
    }
    const auto rep = holdout_report(params);
    EpochLog e{epoch, loss, taken, {rep.classes[0].f1, rep.classes[1].f1, rep.classes[2].f1}, rep.level12_f1()};
    if (e.score > best_score) {
      best_score = e.score;
      best = params;
      res.best_epoch = epoch;
    }
    res.log.push_back(e);
  }
  if (res.best_epoch > 0) model.params = best;

  std::array<std::size_t, kClasses> before{}, after{};
  for (auto i : res.split.train) ++before[static_cast<std::size_t>(labels[i])];
  for (auto i : tr) ++after[static_cast<std::size_t>(labels[i])];
  json rows = json::array();
  for (const auto& r : data) rows.push_back({r.x, r.label});
  model.manifest = {{"seed", opts.seed},
                    {"step_size", opts.step_size},
                    {"epochs", opts.epochs},
                    {"holdout_fraction", opts.holdout_fraction},
                    {"best_epoch", res.best_epoch},
                    {"best_score", res.best_epoch ? json(best_score) : json(nullptr)},
                    {"initial_loss", res.initial_loss},
                    {"final_loss", res.log.empty() ? res.initial_loss : res.log.back().loss},
                    {"n_examples", data.size()},
                    {"n_train", res.split.train.size()},
                    {"n_holdout", res.split.holdout.size()},
                    {"train_class_counts", before},
                    {"oversampled_class_counts", after},
                    {"normalization_frozen", init != nullptr},
                    {"data_digest", io::fnv1a_hex(rows.dump())}};
  res.model = std::move(model);
  return res;
}

struct PipelineResult {
  TrainResult pretrain;
  TrainResult finetune;

  std::string log_jsonl() const {
    std::string out;
    for (const auto& [stage, r] : {std::pair<const char*, const TrainResult*>{"pretrain", &pretrain}, {"finetune", &finetune}}) {
      out += json{{"stage", stage}, {"event", "start"}, {"initial_loss", r->initial_loss}}.dump() + "\n";
      for (const auto& e : r->log) {
        auto j = to_json(e);
        j["stage"] = stage;
        out += j.dump() + "\n";
      }
      out += json{{"stage", stage}, {"event", "end"}, {"best_epoch", r->best_epoch}}.dump() + "\n";
    }
    return out;
  }
};

/// Stage 1 trains on synthetic examples; stage 2 continues from the stage-1
/// checkpoint on real annotations with the stage-1 normalisation.
inline PipelineResult pretrain_then_finetune(Category category, std::span<const Example> synthetic,
                                             std::span<const Example> real, const TrainOptions& stage1,
                                             const TrainOptions& stage2) {
  if (category == Category::deletion) {
    throw ContractError("deletion models train directly on real data without synthetic pretraining");
  }
  PipelineResult r;
  r.pretrain = train(category, synthetic, stage1);
  r.finetune = train(category, real, stage2, &r.pretrain.model);
  r.finetune.model.manifest["pretrain"] = r.pretrain.model.manifest;
  return r;
}

}  // namespace simpfact::classifier
