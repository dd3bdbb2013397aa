#pragma once

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simpfact/corpus.hpp"
#include "simpfact/perturb/generators.hpp"

namespace simpfact::perturb {

// ---------------------------------------------------------------------------
// Corpus-level generation

struct GenerateOptions {
  std::vector<Generator> generators{kAllGenerators.begin(), kAllGenerators.end()};
  std::uint64_t seed = 0;
  const metrics::EmbeddingProvider* similarity = nullptr;  // required for phrase_insertion
  const MaskedLanguageModel* masked_lm = nullptr;          // required for mask_fill
  PhraseOptions phrase;
  MaskOptions mask;
  bool use_simple_side = false;  // perturb simple_text instead of complex_text
  std::size_t jobs = 1;
};

/// Runs every selected generator on one text, in `kAllGenerators` order.
inline std::vector<PerturbedExample> generate_for_text(std::string_view text, std::string_view pair_id,
                                                       const GenerateOptions& opts) {
  std::vector<PerturbedExample> out;
  auto append = [&](std::vector<PerturbedExample>&& v) {
    for (auto& e : v) out.push_back(std::move(e));
  };
  auto selected = [&](Generator g) {
    return std::find(opts.generators.begin(), opts.generators.end(), g) != opts.generators.end();
  };
  for (auto g : kAllGenerators) {
    if (!selected(g)) continue;
    switch (g) {
      case Generator::name_insertion:
        append(gen_name_insertion(text, pair_id));
        break;
      case Generator::phrase_insertion:
        if (!opts.similarity) throw ContractError("phrase_insertion needs a similarity provider");
        append(gen_phrase_insertion(text, *opts.similarity, pair_id, opts.phrase));
        break;
      case Generator::number_alteration:
        append(gen_number_alteration(text, opts.seed, pair_id));
        break;
      case Generator::statement_negation:
        append(gen_statement_negation(text, pair_id));
        break;
      case Generator::mask_fill:
        if (!opts.masked_lm) throw ContractError("mask_fill needs a masked language model");
        for (auto mode : {MaskMode::level1, MaskMode::level2}) {
          if (auto e = gen_mask_fill(text, *opts.masked_lm, mode, opts.seed, pair_id, opts.mask)) {
            out.push_back(std::move(*e));
          }
        }
        break;
    }
  }
  return out;
}

/// Generates over a corpus. Output order is pair order regardless of `jobs`;
/// concurrency is capped by the providers' declared limits.
inline std::vector<PerturbedExample> generate(const std::vector<corpus::SentencePair>& pairs,
                                              const GenerateOptions& opts) {
  std::size_t jobs = std::max<std::size_t>(1, opts.jobs);
  if (opts.similarity) jobs = std::min(jobs, opts.similarity->max_parallelism());
  if (opts.masked_lm) jobs = std::min(jobs, opts.masked_lm->max_parallelism());
  jobs = std::min(jobs, std::max<std::size_t>(1, pairs.size()));

  std::vector<std::vector<PerturbedExample>> per_pair(pairs.size());
  auto work = [&](std::size_t start) {
    for (std::size_t i = start; i < pairs.size(); i += jobs) {
      const auto& p = pairs[i];
      per_pair[i] = generate_for_text(opts.use_simple_side ? p.simple_text : p.complex_text, p.id, opts);
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::future<void>> futures;
    for (std::size_t t = 0; t < jobs; ++t) futures.push_back(std::async(std::launch::async, work, t));
    for (auto& f : futures) f.get();
  }
  std::vector<PerturbedExample> out;
  for (auto& v : per_pair) {
    for (auto& e : v) out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

/// One row of a classifier dataset: `label` is the severity level 0..2 of
/// errors of the dataset's category in `target` relative to `source`.
struct LabeledExample {
  std::string id;
  std::string source;
  std::string target;
  int label = 0;
  std::string origin;  // "original" or a generator name

  bool operator==(const LabeledExample&) const = default;
};

inline json to_json(const LabeledExample& e) {
  return {{"id", e.id}, {"source", e.source}, {"target", e.target}, {"label", e.label}, {"origin", e.origin}};
}

inline LabeledExample labeled_from_json(const json& j) {
  LabeledExample e;
  e.id = corpus::detail::require_string(j, "id");
  e.source = corpus::detail::require_string(j, "source");
  e.target = corpus::detail::require_string(j, "target");
  const auto& label = corpus::detail::require(j, "label");
  if (!label.is_number_integer() || label.get<int>() < 0 || label.get<int>() > 2) {
    throw ValidationError("field 'label' must be 0, 1 or 2");
  }
  e.label = label.get<int>();
  if (auto it = j.find("origin"); it != j.end() && it->is_string()) e.origin = it->get<std::string>();
  return e;
}

inline std::vector<LabeledExample> load_labeled(const std::filesystem::path& path) {
  std::vector<LabeledExample> out;
  io::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(labeled_from_json(j)); });
  return out;
}

inline std::string labeled_to_jsonl(const std::vector<LabeledExample>& v) {
  return io::to_jsonl(v, [](const LabeledExample& e) { return to_json(e); });
}

struct AssemblyOptions {
  std::uint64_t seed = 0;
  /// Insertion only: sample level 1 down to the level-2 count. Skipped when
  /// there are no level-2 examples.
  bool balance_insertion = true;
  std::optional<std::size_t> cap_level1{};
  std::optional<std::size_t> cap_level2{};
};

struct SyntheticDataset {
  Category category = Category::insertion;
  std::vector<LabeledExample> examples;
  json manifest;

  std::array<std::size_t, 3> counts() const {
    std::array<std::size_t, 3> c{};
    for (const auto& e : examples) ++c[static_cast<std::size_t>(e.label)];
    return c;
  }
};

namespace detail {

// Keeps a seeded uniform sample of `keep` indices, in their original order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t keep, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (keep >= n) return idx;
  portable_shuffle(idx, rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// Level-0 rows come from `clean` (source = complex, target = simple), then
/// generated examples of `category` in input order after sampling.
inline SyntheticDataset assemble_synthetic_dataset(Category category, const std::vector<PerturbedExample>& generated,
                                                   const std::vector<corpus::SentencePair>& clean,
                                                   const AssemblyOptions& opts = {}) {
  SyntheticDataset ds;
  ds.category = category;
  for (const auto& p : clean) {
    ds.examples.push_back({p.id, p.complex_text, p.simple_text, 0, "original"});
  }

  std::array<std::vector<const PerturbedExample*>, 2> by_level;
  std::map<std::string, std::array<std::size_t, 2>> before;
  for (const auto& e : generated) {
    if (e.category != category) continue;
    if (e.source_text == e.target_text) throw ContractError("perturbed example with source equal to target");
    const auto lvl = static_cast<std::size_t>(to_int(e.severity)) - 1;
    if (lvl > 1) throw ContractError("perturbed example severity must be 1 or 2");
    by_level[lvl].push_back(&e);
    ++before[std::string(to_string(e.generator))][lvl];
  }

  std::array<std::size_t, 2> keep{by_level[0].size(), by_level[1].size()};
  bool balanced = false;
  if (category == Category::insertion && opts.balance_insertion && !by_level[1].empty() && keep[0] > keep[1]) {
    keep[0] = keep[1];
    balanced = true;
  }
  if (opts.cap_level1) keep[0] = std::min(keep[0], *opts.cap_level1);
  if (opts.cap_level2) keep[1] = std::min(keep[1], *opts.cap_level2);

  std::map<std::string, std::array<std::size_t, 2>> after;
  std::map<std::string, std::size_t> serial;
  for (std::size_t lvl = 0; lvl < 2; ++lvl) {
    auto rng = keyed_rng(opts.seed, std::string(to_string(category)) + "\x1f" + "level" + std::to_string(lvl + 1));
    for (auto i : detail::sample_indices(by_level[lvl].size(), keep[lvl], rng)) {
      const auto& e = *by_level[lvl][i];
      const std::string gen(to_string(e.generator));
      const auto k = serial[e.pair_id + "/" + gen]++;
      ds.examples.push_back({e.pair_id + "/" + gen + "/" + std::to_string(k), e.source_text, e.target_text,
                             static_cast<int>(lvl + 1), gen});
      ++after[gen][lvl];
    }
  }

  const auto c = ds.counts();
  json gens = json::object();
  for (const auto& [g, n] : before) {
    gens[g] = {{"generated", {{"1", n[0]}, {"2", n[1]}}},
               {"kept", {{"1", after[g][0]}, {"2", after[g][1]}}}};
  }
  ds.manifest = {{"category", to_string(category)},
                 {"seed", opts.seed},
                 {"counts", {{"0", c[0]}, {"1", c[1]}, {"2", c[2]}}},
                 {"total", ds.examples.size()},
                 {"insertion_balanced", balanced},
                 {"generators", gens}};
  return ds;
}

}  // namespace simpfact::perturb
