#pragma once

#include <atomic>
#include <csignal>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "simpfact/classifier.hpp"
#include "simpfact/corpus.hpp"
#include "simpfact/metrics.hpp"
#include "simpfact/parallel.hpp"
#include "simpfact/perturb.hpp"
#include "simpfact/remote.hpp"
#include "simpfact/service.hpp"
#include "simpfact/stats/correlation.hpp"
#include "simpfact/stats/distribution.hpp"
#include "simpfact/stats/report.hpp"

namespace simpfact::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Run records and output

/// Everything that determines a run's output. The config digest covers the
/// option values and input contents, not input paths, so the same data under
/// another name reproduces the same digest.
struct RunRecord {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  std::optional<std::uint64_t> seed{};

  void input(const std::string& name, const fs::path& path) { inputs[name] = io::fnv1a_hex(io::read_file(path)); }

  json seed_json() const { return seed ? json(*seed) : json(nullptr); }

  std::string digest() const {
    return io::fnv1a_hex(json{{"command", command}, {"config", config}, {"inputs", inputs}, {"seed", seed_json()}}.dump());
  }

  json manifest() const {
    return {{"tool", "simpfact"},   {"command", command}, {"config_digest", digest()},
            {"seed", seed_json()}, {"config", config},   {"inputs", inputs}};
  }

  std::string tsv_comment() const {
    return "# simpfact " + command + " config_digest=" + digest() + " seed=" + (seed ? std::to_string(*seed) : "none") + "\n";
  }
};

enum class Format { json, tsv };

/// Artifacts go to files under `dir` with a sidecar manifest.json listing
/// each file's digest, or to `out` when no directory was given.
class Output {
 public:
  Output(std::optional<fs::path> dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {}

  bool to_dir() const { return dir_.has_value(); }

  void write(const std::string& name, const std::string& content) {
    io::write_file(*dir_ / name, content);
    artifacts_[name] = io::fnv1a_hex(content);
  }

  void print(const std::string& content) { out_ << content; }

  void finish(const RunRecord& rec, const json& extra = json::object()) {
    if (!dir_) return;
    auto m = rec.manifest();
    m["artifacts"] = artifacts_;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    io::write_file(*dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::optional<fs::path> dir_;
  std::ostream& out_;
  json artifacts_ = json::object();
};

inline std::string cell(const json& v) {
  if (v.is_null()) return "NA";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Long-format table: one row per object, columns in `columns` order.
inline std::string rows_to_tsv(const json& rows, const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "\t" : "") + columns[i];
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "\t" : "") + cell(r.at(columns[i]));
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared flags

struct CommonFlags {
  std::string format = "json";
  std::optional<std::string> out;
  std::size_t jobs = 1;

  Format fmt() const { return format == "tsv" ? Format::tsv : Format::json; }
  std::optional<fs::path> out_dir() const { return out ? std::optional<fs::path>(*out) : std::nullopt; }
};

inline void add_common(CLI::App* app, CommonFlags& f, bool jobs = false) {
  app->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "tsv"}));
  app->add_option("--out", f.out, "Output directory (artifacts plus manifest.json); stdout when absent");
  if (jobs) app->add_option("--jobs", f.jobs, "Parallel workers")->check(CLI::Range(1, 1024));
}

/// Pairs from a JSON-lines file or from two line-aligned text files.
struct PairsFlags {
  std::optional<std::string> pairs, complex, simple;
  std::string origin = "corpus";
  std::string origin_kind = "reference";
  std::string split = "unsplit";

  std::vector<corpus::SentencePair> load(RunRecord& rec) const {
    if (pairs && (complex || simple)) throw ContractError("give either --pairs or --complex/--simple, not both");
    if (pairs) {
      rec.input("pairs", *pairs);
      return corpus::load_pairs(*pairs);
    }
    if (!complex || !simple) throw ContractError("input pairs required: --pairs FILE or --complex FILE --simple FILE");
    rec.input("complex", *complex);
    rec.input("simple", *simple);
    rec.config["origin"] = origin;
    rec.config["origin_kind"] = origin_kind;
    rec.config["split"] = split;
    return corpus::load_parallel_corpus(*complex, *simple,
                                        {corpus::origin_kind_from_string(origin_kind), origin},
                                        corpus::split_from_string(split));
  }
};

inline void add_pairs(CLI::App* app, PairsFlags& f) {
  app->add_option("--pairs", f.pairs, "Sentence pairs, JSON lines");
  app->add_option("--complex", f.complex, "Complex side, one sentence per line");
  app->add_option("--simple", f.simple, "Simple side, one sentence per line");
  app->add_option("--origin", f.origin, "Origin name for line-aligned input");
  app->add_option("--origin-kind", f.origin_kind)->check(CLI::IsMember({"reference", "system"}));
  app->add_option("--split", f.split)->check(CLI::IsMember({"train", "validation", "test", "unsplit"}));
}

/// Aggregated labels, read directly or computed from raw votes.
struct LabelsFlags {
  std::optional<std::string> aggregated, votes;

  bool given() const { return aggregated || votes; }

  std::vector<stats::AggregatedLabel> load(RunRecord& rec) const {
    if (aggregated && votes) throw ContractError("give either --aggregated or --votes, not both");
    if (aggregated) {
      rec.input("aggregated", *aggregated);
      return stats::load_aggregated(*aggregated);
    }
    if (!votes) throw ContractError("labels required: --aggregated FILE or --votes FILE");
    rec.input("votes", *votes);
    return stats::aggregate(stats::group_votes(corpus::load_votes(*votes)));
  }
};

inline void add_labels(CLI::App* app, LabelsFlags& f) {
  app->add_option("--aggregated", f.aggregated, "Aggregated labels, JSON lines");
  app->add_option("--votes", f.votes, "Raw annotation votes, JSON lines (3 per pair)");
}

struct ProviderFlags {
  std::string similarity = "none";
  std::optional<std::string> embed_endpoint;
  std::size_t embed_dim = 0;
  std::string masklm = "hash";
  std::optional<std::string> masklm_endpoint;
  int timeout_ms = 30000;

  remote::ClientOptions client() const {
    remote::ClientOptions o;
    o.read_timeout = std::chrono::milliseconds(timeout_ms);
    return o;
  }

  std::unique_ptr<metrics::EmbeddingProvider> make_similarity(RunRecord& rec) const {
    std::unique_ptr<metrics::EmbeddingProvider> p;
    if (similarity == "hash") {
      p = std::make_unique<metrics::HashEmbeddingProvider>(embed_dim ? embed_dim : 64);
    } else if (similarity == "token-f1") {
      p = std::make_unique<metrics::TokenF1Provider>();
    } else if (similarity == "remote") {
      const auto url = remote::endpoint_from(embed_endpoint, "EMBED_ENDPOINT");
      if (!url) throw ContractError("--similarity remote needs --embed-endpoint or EMBED_ENDPOINT");
      p = std::make_unique<remote::RemoteEmbeddingProvider>(*url, "remote-embedding", embed_dim, client());
      rec.config["embed_endpoint"] = *url;
    }
    rec.config["similarity"] = similarity;
    if (similarity == "hash" || similarity == "remote") rec.config["embed_dim"] = embed_dim;
    return p;
  }

  std::unique_ptr<perturb::MaskedLanguageModel> make_masklm(RunRecord& rec) const {
    rec.config["masklm"] = masklm;
    if (masklm == "remote") {
      const auto url = remote::endpoint_from(masklm_endpoint, "MASKLM_ENDPOINT");
      if (!url) throw ContractError("--masklm remote needs --masklm-endpoint or MASKLM_ENDPOINT");
      rec.config["masklm_endpoint"] = *url;
      return std::make_unique<remote::RemoteMaskedLM>(*url, "remote-masklm", client());
    }
    return std::make_unique<perturb::HashMaskedLM>();
  }
};

inline void add_similarity(CLI::App* app, ProviderFlags& f) {
  app->add_option("--similarity", f.similarity, "Similarity provider")
      ->check(CLI::IsMember({"none", "hash", "token-f1", "remote"}));
  app->add_option("--embed-endpoint", f.embed_endpoint, "Embedding service URL (else EMBED_ENDPOINT)");
  app->add_option("--embed-dim", f.embed_dim, "Embedding dimension (hash stub size; 0 = from service)");
  app->add_option("--timeout-ms", f.timeout_ms, "Provider request timeout")->check(CLI::PositiveNumber);
}

inline void add_masklm(CLI::App* app, ProviderFlags& f) {
  app->add_option("--masklm", f.masklm, "Masked-LM provider")->check(CLI::IsMember({"hash", "remote"}));
  app->add_option("--masklm-endpoint", f.masklm_endpoint, "Masked-LM service URL (else MASKLM_ENDPOINT)");
}

inline Category parse_category(const std::string& s) {
  for (auto c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  throw ContractError("unknown category '" + s + "'");
}

// ---------------------------------------------------------------------------
// analyze

struct MetricColumn {
  const char* name;
  std::function<std::optional<double>(const metrics::MetricVector&)> get;
};

inline const std::vector<MetricColumn>& metric_columns() {
  static const std::vector<MetricColumn> cols{
      {"sari", [](const metrics::MetricVector& m) { return m.sari; }},
      {"norm_edit_distance", [](const metrics::MetricVector& m) { return std::optional(m.norm_edit_distance); }},
      {"length_change_pct", [](const metrics::MetricVector& m) { return std::optional(m.length_change_pct); }},
      {"jaccard", [](const metrics::MetricVector& m) { return std::optional(m.jaccard); }},
      {"embed_similarity",
       [](const metrics::MetricVector& m) {
         return m.embed_similarity ? std::optional(m.embed_similarity->score) : std::nullopt;
       }},
  };
  return cols;
}

/// Per metric, category and label level: n, mean and sample deviation of the
/// metric over pairs whose aggregated label is that level.
inline json stratify(const std::vector<metrics::MetricVector>& mvs, const std::vector<stats::AggregatedLabel>& labels) {
  std::map<std::string, const stats::AggregatedLabel*> by_id;
  for (const auto& l : labels) by_id[l.pair_id] = &l;
  json rows = json::array();
  for (const auto& col : metric_columns()) {
    for (auto c : kAllCategories) {
      std::vector<double> values;
      std::vector<Outcome> outcomes;
      for (const auto& mv : mvs) {
        auto it = by_id.find(mv.pair_id);
        const auto v = col.get(mv);
        if (it == by_id.end() || !v) continue;
        values.push_back(*v);
        outcomes.push_back(it->second->outcomes[c]);
      }
      if (values.empty()) continue;
      const auto st = stats::stratified_stat(values, outcomes);
      for (std::size_t lvl = 0; lvl < 4; ++lvl) {
        const auto& s = st[lvl];
        rows.push_back({{"metric", col.name},
                        {"category", to_string(c)},
                        {"level", stats::kLevelNames[lvl]},
                        {"n", s ? s->n : 0},
                        {"mean", s ? json(s->mean) : json(nullptr)},
                        {"std", s && s->stddev ? json(*s->stddev) : json(nullptr)}});
      }
    }
  }
  return rows;
}

inline const std::vector<std::string> kStratifiedColumns{"metric", "category", "level", "n", "mean", "std"};

struct AnalyzeFlags {
  CommonFlags common;
  PairsFlags pairs;
  LabelsFlags labels;
  ProviderFlags providers;
  std::vector<std::string> references;
  std::string edit_unit = "token";
};

inline int run_analyze(const AnalyzeFlags& f, std::ostream& out) {
  RunRecord rec{"analyze"};
  const auto pairs = f.pairs.load(rec);
  std::vector<std::vector<std::string>> refs;
  for (std::size_t k = 0; k < f.references.size(); ++k) {
    rec.input("reference" + std::to_string(k + 1), f.references[k]);
    const auto lines = io::read_lines(f.references[k]);
    if (lines.size() != pairs.size()) throw AlignmentError(pairs.size(), lines.size());
    refs.resize(pairs.size());
    for (std::size_t i = 0; i < lines.size(); ++i) refs[i].push_back(lines[i]);
  }
  rec.config["edit_unit"] = f.edit_unit;
  const auto provider = f.providers.make_similarity(rec);
  metrics::MetricOptions mo;
  mo.edit_unit = f.edit_unit == "char" ? metrics::EditUnit::character : metrics::EditUnit::token;
  mo.provider = provider.get();
  const auto jobs = provider ? std::min(f.common.jobs, provider->max_parallelism()) : f.common.jobs;
  const auto mvs = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    return metrics::compute_metrics(pairs[i], refs.empty() ? nullptr : &refs[i], mo);
  });

  json stratified;
  if (f.labels.given()) stratified = stratify(mvs, f.labels.load(rec));

  std::string tsv(metrics::kMetricTsvHeader);
  tsv += "\n";
  for (const auto& mv : mvs) tsv += metrics::to_tsv_row(mv) + "\n";
  const auto jsonl = io::to_jsonl(mvs, [](const metrics::MetricVector& m) { return metrics::to_json(m); });

  json summary{{"n_pairs", mvs.size()}};
  if (!refs.empty()) {
    std::vector<metrics::SariItem> items;
    for (std::size_t i = 0; i < pairs.size(); ++i) items.push_back({pairs[i].complex_text, pairs[i].simple_text, refs[i]});
    summary["corpus_sari"] = pairs.empty() ? json(nullptr) : json(metrics::corpus_sari(items));
  }

  Output o(f.common.out_dir(), out);
  if (o.to_dir()) {
    if (f.common.fmt() == Format::tsv) {
      o.write("metrics.tsv", tsv);
      if (!stratified.is_null()) o.write("stratified.tsv", rows_to_tsv(stratified, kStratifiedColumns));
    } else {
      o.write("metrics.jsonl", jsonl);
      if (!stratified.is_null()) o.write("stratified.json", stratified.dump(2) + "\n");
    }
    o.finish(rec, {{"summary", summary}});
  } else if (f.common.fmt() == Format::tsv) {
    o.print(rec.tsv_comment() + tsv);
    if (!stratified.is_null()) o.print("\n" + rows_to_tsv(stratified, kStratifiedColumns));
  } else {
    json arr = json::array();
    for (const auto& mv : mvs) arr.push_back(metrics::to_json(mv));
    json doc{{"manifest", rec.manifest()}, {"summary", summary}, {"metrics", arr}};
    if (!stratified.is_null()) doc["stratified"] = stratified;
    o.print(doc.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// agree

struct AgreeFlags {
  CommonFlags common;
  std::string votes;
};

inline int run_agree(const AgreeFlags& f, std::ostream& out) {
  RunRecord rec{"agree"};
  rec.input("votes", f.votes);
  const auto bundle = stats::build_export(corpus::load_votes(f.votes));
  Output o(f.common.out_dir(), out);
  if (o.to_dir()) {
    // Same four files the annotation service exports, byte for byte.
    o.write("aggregated.jsonl", bundle.aggregated_jsonl());
    o.write("report.json", bundle.report_text());
    o.write("agreement.tsv", bundle.agreement_tsv());
    o.write("distribution.tsv", bundle.distribution_tsv());
    o.finish(rec);
  } else if (f.common.fmt() == Format::tsv) {
    o.print(rec.tsv_comment() + bundle.agreement_tsv() + "\n" + bundle.distribution_tsv());
  } else {
    json agg = json::array();
    for (const auto& a : bundle.aggregated) agg.push_back(stats::to_json(a));
    o.print(json{{"manifest", rec.manifest()}, {"aggregated", agg}, {"report", bundle.report_json()}}.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// correlate

/// Spearman ρ between each metric and each category's aggregated severity
/// (ordinal rank, gibberish highest unless excluded). Cells with fewer than
/// three observations or a constant side are reported as undefined.
inline json correlation_cells(const std::vector<metrics::MetricVector>& mvs,
                              const std::vector<stats::AggregatedLabel>& labels, bool exclude_gibberish) {
  std::map<std::string, const stats::AggregatedLabel*> by_id;
  for (const auto& l : labels) by_id[l.pair_id] = &l;
  json cells = json::array();
  for (const auto& col : metric_columns()) {
    for (auto c : kAllCategories) {
      std::vector<double> xs, ys;
      for (const auto& mv : mvs) {
        auto it = by_id.find(mv.pair_id);
        const auto v = col.get(mv);
        if (it == by_id.end() || !v) continue;
        const auto& o = it->second->outcomes[c];
        if (!o || (exclude_gibberish && *o == Severity::gibberish)) continue;
        xs.push_back(*v);
        ys.push_back(ordinal_rank(*o));
      }
      json cell{{"metric", col.name}, {"category", to_string(c)}, {"n", xs.size()}, {"rho", nullptr}, {"note", ""}};
      try {
        cell["rho"] = stats::spearman(xs, ys);
      } catch (const DegenerateInputError&) {
        cell["note"] = "constant";
      } catch (const ContractError&) {
        cell["note"] = "too few pairs";
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

struct CorrelateFlags {
  CommonFlags common;
  std::string metrics;
  LabelsFlags labels;
  bool exclude_gibberish = false;
};

inline int run_correlate(const CorrelateFlags& f, std::ostream& out) {
  RunRecord rec{"correlate"};
  rec.input("metrics", f.metrics);
  rec.config["exclude_gibberish"] = f.exclude_gibberish;
  const auto mvs = metrics::load_metric_vectors(f.metrics);
  const auto cells = correlation_cells(mvs, f.labels.load(rec), f.exclude_gibberish);
  const std::vector<std::string> cols{"metric", "category", "n", "rho", "note"};
  Output o(f.common.out_dir(), out);
  if (o.to_dir()) {
    if (f.common.fmt() == Format::tsv) {
      o.write("correlations.tsv", rows_to_tsv(cells, cols));
    } else {
      o.write("correlations.json", cells.dump(2) + "\n");
    }
    o.finish(rec);
  } else if (f.common.fmt() == Format::tsv) {
    o.print(rec.tsv_comment() + rows_to_tsv(cells, cols));
  } else {
    o.print(json{{"manifest", rec.manifest()}, {"correlations", cells}}.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// perturb

struct PerturbFlags {
  CommonFlags common;
  PairsFlags pairs;
  ProviderFlags providers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> generators;
  bool use_simple_side = false;
  bool include_punctuation = false;
  bool no_balance = false;
  std::vector<double> minor_band{0.6, 0.8};
  std::vector<double> major_band{0.2, 0.4};
  std::optional<std::size_t> cap_level1, cap_level2;
};

inline int run_perturb(const PerturbFlags& f, std::ostream& out) {
  if (!f.seed) throw ContractError("perturb requires --seed");
  if (!f.common.out) throw ContractError("perturb requires --out DIR");
  RunRecord rec{"perturb"};
  rec.seed = f.seed;
  const auto pairs = f.pairs.load(rec);

  perturb::GenerateOptions go;
  go.seed = *f.seed;
  if (!f.generators.empty()) {
    go.generators.clear();
    for (const auto& g : f.generators) go.generators.push_back(perturb::generator_from_string(g));
  }
  auto has = [&](perturb::Generator g) { return std::find(go.generators.begin(), go.generators.end(), g) != go.generators.end(); };
  std::unique_ptr<metrics::EmbeddingProvider> sim;
  std::unique_ptr<perturb::MaskedLanguageModel> mlm;
  if (has(perturb::Generator::phrase_insertion)) {
    sim = f.providers.make_similarity(rec);
    if (!sim) throw ContractError("phrase_insertion needs a similarity provider (--similarity)");
  }
  if (has(perturb::Generator::mask_fill)) mlm = f.providers.make_masklm(rec);
  go.similarity = sim.get();
  go.masked_lm = mlm.get();
  go.phrase.level1_low = f.minor_band[0];
  go.phrase.level1_high = f.minor_band[1];
  go.phrase.level2_low = f.major_band[0];
  go.phrase.level2_high = f.major_band[1];
  go.mask.include_punctuation = f.include_punctuation;
  go.use_simple_side = f.use_simple_side;
  go.jobs = f.common.jobs;

  json gens = json::array();
  for (auto g : go.generators) gens.push_back(to_string(g));
  rec.config["generators"] = gens;
  rec.config["minor_band"] = f.minor_band;
  rec.config["major_band"] = f.major_band;
  rec.config["include_punctuation"] = f.include_punctuation;
  rec.config["use_simple_side"] = f.use_simple_side;
  rec.config["balance_insertion"] = !f.no_balance;
  rec.config["cap_level1"] = f.cap_level1 ? json(*f.cap_level1) : json(nullptr);
  rec.config["cap_level2"] = f.cap_level2 ? json(*f.cap_level2) : json(nullptr);

  const auto examples = perturb::generate(pairs, go);
  perturb::AssemblyOptions ao;
  ao.seed = *f.seed;
  ao.balance_insertion = !f.no_balance;
  ao.cap_level1 = f.cap_level1;
  ao.cap_level2 = f.cap_level2;

  Output o(f.common.out_dir(), out);
  o.write("examples.jsonl", io::to_jsonl(examples, [](const perturb::PerturbedExample& e) { return perturb::to_json(e); }));
  json datasets = json::object();
  for (auto c : {Category::insertion, Category::substitution}) {
    const auto ds = perturb::assemble_synthetic_dataset(c, examples, pairs, ao);
    o.write("dataset_" + std::string(to_string(c)) + ".jsonl", perturb::labeled_to_jsonl(ds.examples));
    datasets[std::string(to_string(c))] = ds.manifest;
  }
  json providers = json::object();
  if (sim) providers["similarity"] = sim->name();
  if (mlm) providers["masked_lm"] = mlm->name();
  o.finish(rec, {{"n_pairs", pairs.size()}, {"n_examples", examples.size()}, {"providers", providers}, {"datasets", datasets}});
  return 0;
}

// ---------------------------------------------------------------------------
// filter

struct FilterFlags {
  CommonFlags common;
  PairsFlags pairs;
  double single_min = 0.4;
  double multi_min = 0.2;
  bool case_sensitive = false;
};

inline int run_filter(const FilterFlags& f, std::ostream& out) {
  RunRecord rec{"filter"};
  const auto pairs = f.pairs.load(rec);
  corpus::NoiseFilterOptions nf;
  nf.single_sentence_min = f.single_min;
  nf.multi_sentence_min = f.multi_min;
  nf.lowercase = !f.case_sensitive;
  rec.config = {{"single_sentence_min", f.single_min}, {"multi_sentence_min", f.multi_min}, {"lowercase", nf.lowercase}};

  json decisions = json::array();
  std::vector<corpus::SentencePair> kept;
  for (const auto& p : pairs) {
    const auto n = nf.sentence_counter(p.simple_text);
    const bool keep = corpus::passes_noise_filter(p, nf);
    decisions.push_back({{"id", p.id},
                         {"jaccard", corpus::token_set_jaccard(p.complex_text, p.simple_text, nf.lowercase)},
                         {"simple_sentences", n},
                         {"threshold", n > 1 ? nf.multi_sentence_min : nf.single_sentence_min},
                         {"kept", keep}});
    if (keep) kept.push_back(p);
  }
  const json summary{{"n_input", pairs.size()}, {"n_kept", kept.size()}, {"n_dropped", pairs.size() - kept.size()}};
  const std::vector<std::string> cols{"id", "jaccard", "simple_sentences", "threshold", "kept"};
  Output o(f.common.out_dir(), out);
  if (o.to_dir()) {
    o.write("kept.jsonl", corpus::pairs_to_jsonl(kept));
    if (f.common.fmt() == Format::tsv) {
      o.write("decisions.tsv", rows_to_tsv(decisions, cols));
    } else {
      o.write("decisions.json", decisions.dump(2) + "\n");
    }
    o.finish(rec, {{"summary", summary}});
  } else if (f.common.fmt() == Format::tsv) {
    o.print(rec.tsv_comment() + rows_to_tsv(decisions, cols));
  } else {
    o.print(json{{"manifest", rec.manifest()}, {"summary", summary}, {"decisions", decisions}}.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train / evaluate

/// Classifier rows with gold outcomes, from a labeled-example file or from
/// pairs joined with aggregated labels for one category.
struct LabeledRows {
  std::vector<std::string> source, target;
  std::vector<Outcome> gold;
};

struct DataFlags {
  std::optional<std::string> data;
  PairsFlags pairs;
  LabelsFlags labels;

  bool pairs_given() const { return pairs.pairs || pairs.complex || pairs.simple; }

  LabeledRows load(RunRecord& rec, Category c) const {
    LabeledRows rows;
    if (data) {
      if (pairs_given() || labels.given()) throw ContractError("give either --data or --pairs with labels, not both");
      rec.input("data", *data);
      for (const auto& e : perturb::load_labeled(*data)) {
        rows.source.push_back(e.source);
        rows.target.push_back(e.target);
        rows.gold.push_back(severity_from_int(e.label));
      }
      return rows;
    }
    const auto ps = pairs.load(rec);
    std::map<std::string, Outcome> by_id;
    for (const auto& l : labels.load(rec)) by_id[l.pair_id] = l.outcomes[c];
    for (const auto& p : ps) {
      auto it = by_id.find(p.id);
      if (it == by_id.end()) continue;
      rows.source.push_back(p.complex_text);
      rows.target.push_back(p.simple_text);
      rows.gold.push_back(it->second);
    }
    return rows;
  }
};

inline void add_data(CLI::App* app, DataFlags& f) {
  app->add_option("--data", f.data, "Labeled examples, JSON lines {id, source, target, label}");
  add_pairs(app, f.pairs);
  add_labels(app, f.labels);
}

inline std::vector<std::vector<double>> featurize(const LabeledRows& rows, const metrics::EmbeddingProvider* provider,
                                                  std::size_t jobs) {
  if (provider) jobs = std::min(jobs, provider->max_parallelism());
  return parallel_map(rows.source.size(), jobs, [&](std::size_t i) {
    const auto fv = classifier::extract_features(rows.source[i], rows.target[i], provider);
    return std::vector<double>(fv.begin(), fv.end());
  });
}

/// Rows with a defined, non-gibberish label; the rest are counted.
inline std::vector<classifier::Example> to_examples(const LabeledRows& rows, const std::vector<std::vector<double>>& x,
                                                    std::size_t& excluded) {
  std::vector<classifier::Example> out;
  excluded = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& g = rows.gold[i];
    if (!g || *g == Severity::gibberish) {
      ++excluded;
      continue;
    }
    out.push_back({x[i], to_int(*g)});
  }
  return out;
}

struct TrainFlags {
  CommonFlags common;
  ProviderFlags providers;
  DataFlags data;
  std::optional<std::string> synthetic;
  std::string category;
  std::optional<std::uint64_t> seed;
  std::size_t epochs = 200;
  double step_size = 1.0;
  double holdout = 0.2;
  std::optional<std::size_t> pretrain_epochs;
};

inline int run_train(const TrainFlags& f, std::ostream& out) {
  if (!f.seed) throw ContractError("train requires --seed");
  if (!f.common.out) throw ContractError("train requires --out DIR");
  RunRecord rec{"train"};
  rec.seed = f.seed;
  const auto cat = parse_category(f.category);
  rec.config["category"] = f.category;
  rec.config["epochs"] = f.epochs;
  rec.config["step_size"] = f.step_size;
  rec.config["holdout_fraction"] = f.holdout;
  const auto provider = f.providers.make_similarity(rec);

  std::size_t excluded = 0;
  const auto rows = f.data.load(rec, cat);
  const auto real = to_examples(rows, featurize(rows, provider.get(), f.common.jobs), excluded);

  classifier::TrainOptions opts;
  opts.seed = *f.seed;
  opts.epochs = f.epochs;
  opts.step_size = f.step_size;
  opts.holdout_fraction = f.holdout;

  classifier::SeverityClassifier model;
  std::string log;
  json summary;
  if (f.synthetic) {
    rec.input("synthetic", *f.synthetic);
    auto s1 = opts;
    s1.epochs = f.pretrain_epochs.value_or(f.epochs);
    rec.config["pretrain_epochs"] = s1.epochs;
    LabeledRows syn_rows;
    for (const auto& e : perturb::load_labeled(*f.synthetic)) {
      syn_rows.source.push_back(e.source);
      syn_rows.target.push_back(e.target);
      syn_rows.gold.push_back(severity_from_int(e.label));
    }
    std::size_t syn_excluded = 0;
    const auto syn = to_examples(syn_rows, featurize(syn_rows, provider.get(), f.common.jobs), syn_excluded);
    auto r = classifier::pretrain_then_finetune(cat, syn, real, s1, opts);
    model = std::move(r.finetune.model);
    log = r.log_jsonl();
    summary = {{"pretrain_best_epoch", r.pretrain.best_epoch}, {"best_epoch", r.finetune.best_epoch}};
  } else {
    auto r = classifier::train(cat, real, opts);
    model = std::move(r.model);
    log = r.log_jsonl();
    summary = {{"best_epoch", r.best_epoch}};
  }
  model.manifest["similarity"] = {{"kind", f.providers.similarity},
                                  {"name", provider ? json(provider->name()) : json(nullptr)}};
  model.manifest["n_excluded"] = excluded;
  model.manifest["config_digest"] = rec.digest();
  summary["best_score"] = model.manifest.value("best_score", json(nullptr));
  summary["n_examples"] = real.size();
  summary["n_excluded"] = excluded;

  Output o(f.common.out_dir(), out);
  o.write("model.json", classifier::to_json(model).dump(2) + "\n");
  o.write("train_log.jsonl", log);
  o.finish(rec, {{"summary", summary}});
  return 0;
}

struct EvaluateFlags {
  CommonFlags common;
  ProviderFlags providers;
  DataFlags data;
  std::string model;
};

inline int run_evaluate(EvaluateFlags f, std::ostream& out) {
  RunRecord rec{"evaluate"};
  rec.input("model", f.model);
  const auto model = classifier::classifier_from_json(json::parse(io::read_file(f.model)));
  // Features must be computed the way the model was trained.
  if (f.providers.similarity.empty()) {
    const auto kind = model.manifest.contains("similarity") ? model.manifest["similarity"].value("kind", "none") : "none";
    f.providers.similarity = kind;
  }
  const auto provider = f.providers.make_similarity(rec);
  const auto rows = f.data.load(rec, model.category);
  const auto x = featurize(rows, provider.get(), f.common.jobs);
  const auto report = classifier::evaluate(model, x, rows.gold);

  Output o(f.common.out_dir(), out);
  if (o.to_dir()) {
    if (f.common.fmt() == Format::tsv) {
      o.write("evaluation.tsv", classifier::to_tsv(report));
    } else {
      o.write("evaluation.json", classifier::to_json(report).dump(2) + "\n");
    }
    o.finish(rec);
  } else if (f.common.fmt() == Format::tsv) {
    o.print(rec.tsv_comment() + classifier::to_tsv(report));
  } else {
    auto doc = classifier::to_json(report);
    doc["manifest"] = rec.manifest();
    o.print(doc.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// serve

struct ServeFlags {
  PairsFlags pairs;
  std::string data_dir;
  std::string gold;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t snapshot_every = 100;
};

inline std::atomic<bool>& stop_requested() {
  static std::atomic<bool> flag{false};
  return flag;
}

inline int run_serve(const ServeFlags& f, std::ostream& err) {
  RunRecord rec{"serve"};
  service::ServiceOptions so;
  so.snapshot_every = f.snapshot_every;
  service::AnnotationService svc(f.data_dir, f.pairs.load(rec), service::GoldSet::load(f.gold), so);
  httplib::Server server;
  service::install_routes(server, svc);
  if (!server.bind_to_port(f.host, f.port)) throw IoError("cannot bind " + f.host + ":" + std::to_string(f.port));
  stop_requested() = false;
  std::signal(SIGINT, [](int) { stop_requested() = true; });
  std::signal(SIGTERM, [](int) { stop_requested() = true; });
  std::thread watcher([&] {
    while (!stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  err << "simpfact: serving " << f.data_dir << " on http://" << f.host << ":" << f.port << std::endl;
  server.listen_after_bind();
  stop_requested() = true;
  watcher.join();
  return 0;
}

// ---------------------------------------------------------------------------

/// Parses `argv` and runs one subcommand. Returns 0 on success, 1 for usage
/// or validation errors, 2 for I/O errors.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Factuality evaluation for text simplification", "simpfact"};
  app.require_subcommand(1);

  AnalyzeFlags analyze;
  auto* a = app.add_subcommand("analyze", "Per-pair metrics, optionally stratified by label level");
  add_common(a, analyze.common, true);
  add_pairs(a, analyze.pairs);
  add_labels(a, analyze.labels);
  add_similarity(a, analyze.providers);
  a->add_option("--reference", analyze.references, "Reference file aligned with the pairs (repeatable)");
  a->add_option("--edit-unit", analyze.edit_unit)->check(CLI::IsMember({"token", "char"}));

  AgreeFlags agree;
  auto* ag = app.add_subcommand("agree", "Majority labels, agreement and label distributions");
  add_common(ag, agree.common);
  ag->add_option("--votes", agree.votes, "Annotation votes, JSON lines")->required();

  CorrelateFlags correlate;
  auto* co = app.add_subcommand("correlate", "Spearman correlation of metrics with severity");
  add_common(co, correlate.common);
  co->add_option("--metrics", correlate.metrics, "Metric vectors from analyze, JSON lines")->required();
  add_labels(co, correlate.labels);
  co->add_flag("--exclude-gibberish", correlate.exclude_gibberish, "Drop -1 labels instead of ranking them highest");

  PerturbFlags perturb;
  perturb.providers.similarity = "token-f1";
  auto* pe = app.add_subcommand("perturb", "Generate synthetic insertion and substitution examples");
  add_common(pe, perturb.common, true);
  add_pairs(pe, perturb.pairs);
  add_similarity(pe, perturb.providers);
  add_masklm(pe, perturb.providers);
  pe->add_option("--seed", perturb.seed, "Random seed (required)");
  pe->add_option("--generators", perturb.generators, "Generators to run (default all)")->delimiter(',');
  pe->add_flag("--use-simple-side", perturb.use_simple_side, "Perturb the simple side");
  pe->add_flag("--include-punctuation", perturb.include_punctuation, "Allow masking punctuation tokens");
  pe->add_flag("--no-balance", perturb.no_balance, "Keep all level-1 insertion examples");
  pe->add_option("--minor-band", perturb.minor_band, "Phrase similarity band for level 1")->expected(2)->delimiter(',');
  pe->add_option("--major-band", perturb.major_band, "Phrase similarity band for level 2")->expected(2)->delimiter(',');
  pe->add_option("--cap-level1", perturb.cap_level1);
  pe->add_option("--cap-level2", perturb.cap_level2);

  FilterFlags filter;
  auto* fi = app.add_subcommand("filter", "Alignment-noise filter");
  add_common(fi, filter.common);
  add_pairs(fi, filter.pairs);
  fi->add_option("--single-min", filter.single_min, "Jaccard threshold, one-sentence simple side");
  fi->add_option("--multi-min", filter.multi_min, "Jaccard threshold, longer simple side");
  fi->add_flag("--case-sensitive", filter.case_sensitive, "Compare tokens without lowercasing");

  TrainFlags train;
  auto* tr = app.add_subcommand("train", "Train a severity classifier for one category");
  add_common(tr, train.common, true);
  add_similarity(tr, train.providers);
  add_data(tr, train.data);
  tr->add_option("--category", train.category)->required()->check(CLI::IsMember({"insertion", "deletion", "substitution"}));
  tr->add_option("--synthetic", train.synthetic, "Synthetic dataset for pretraining");
  tr->add_option("--seed", train.seed, "Random seed (required)");
  tr->add_option("--epochs", train.epochs);
  tr->add_option("--pretrain-epochs", train.pretrain_epochs);
  tr->add_option("--step-size", train.step_size)->check(CLI::PositiveNumber);
  tr->add_option("--holdout", train.holdout)->check(CLI::Range(0.0, 0.9));

  EvaluateFlags evaluate;
  evaluate.providers.similarity.clear();
  auto* ev = app.add_subcommand("evaluate", "Per-class precision, recall and F1 of a trained model");
  add_common(ev, evaluate.common, true);
  add_data(ev, evaluate.data);
  ev->add_option("--model", evaluate.model, "Model file from train")->required();
  ev->add_option("--similarity", evaluate.providers.similarity, "Override the model's similarity provider")
      ->check(CLI::IsMember({"none", "hash", "token-f1", "remote"}));
  ev->add_option("--embed-endpoint", evaluate.providers.embed_endpoint);
  ev->add_option("--embed-dim", evaluate.providers.embed_dim);

  ServeFlags serve;
  auto* se = app.add_subcommand("serve", "Run the annotation service");
  add_pairs(se, serve.pairs);
  se->add_option("--data-dir", serve.data_dir, "Event log and export directory")->required();
  se->add_option("--gold", serve.gold, "Qualification gold set")->required();
  se->add_option("--host", serve.host);
  se->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
  se->add_option("--snapshot-every", serve.snapshot_every);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "simpfact: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*a) return run_analyze(analyze, out);
    if (*ag) return run_agree(agree, out);
    if (*co) return run_correlate(correlate, out);
    if (*pe) return run_perturb(perturb, out);
    if (*fi) return run_filter(filter, out);
    if (*tr) return run_train(train, out);
    if (*ev) return run_evaluate(evaluate, out);
    if (*se) return run_serve(serve, err);
  } catch (const Error& e) {
    err << "simpfact: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "simpfact: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "simpfact: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace simpfact::cli
