#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simpfact/corpus.hpp"
#include "simpfact/edit_distance.hpp"
#include "simpfact/embedding.hpp"
#include "simpfact/error.hpp"
#include "simpfact/sari.hpp"
#include "simpfact/text.hpp"

namespace simpfact::metrics {

using json = nlohmann::json;

/// |A∩B| / |A∪B| over lowercased token sets; 1.0 when both are empty.
inline double jaccard(std::string_view a, std::string_view b) {
  return corpus::token_set_jaccard(a, b, true);
}

/// 100 × (tokens(simple) − tokens(complex)) / tokens(complex). Negative means
/// the simplification is shorter.
inline double length_change_pct(std::string_view complex, std::string_view simple) {
  const auto nc = tokenize(complex).size();
  if (nc == 0) throw DegenerateInputError("length change undefined: complex side has no tokens");
  const auto ns = tokenize(simple).size();
  return 100.0 * (static_cast<double>(ns) - static_cast<double>(nc)) / static_cast<double>(nc);
}

struct MetricVector {
  std::string pair_id;
  std::optional<double> sari;  // only when references exist
  double norm_edit_distance = 0;
  double length_change_pct = 0;
  double jaccard = 0;
  std::optional<Similarity> embed_similarity;

  bool operator==(const MetricVector& o) const {
    auto same_sim = [](const std::optional<Similarity>& a, const std::optional<Similarity>& b) {
      if (a.has_value() != b.has_value()) return false;
      return !a || (a->score == b->score && a->provider == b->provider);
    };
    return pair_id == o.pair_id && sari == o.sari && norm_edit_distance == o.norm_edit_distance &&
           length_change_pct == o.length_change_pct && jaccard == o.jaccard &&
           same_sim(embed_similarity, o.embed_similarity);
  }
};

struct MetricOptions {
  EditUnit edit_unit = EditUnit::token;
  const EmbeddingProvider* provider = nullptr;
};

inline MetricVector compute_metrics(const corpus::SentencePair& pair,
                                    const std::vector<std::string>* references = nullptr,
                                    const MetricOptions& opts = {}) {
  MetricVector mv;
  mv.pair_id = pair.id;
  if (references != nullptr && !references->empty()) {
    mv.sari = sari(pair.complex_text, pair.simple_text, *references);
  }
  mv.norm_edit_distance = normalized_edit_distance(pair.complex_text, pair.simple_text, opts.edit_unit);
  mv.length_change_pct = length_change_pct(pair.complex_text, pair.simple_text);
  mv.jaccard = jaccard(pair.complex_text, pair.simple_text);
  if (opts.provider != nullptr) {
    mv.embed_similarity = embed_similarity(pair.complex_text, pair.simple_text, *opts.provider);
  }
  return mv;
}

// ---------------------------------------------------------------------------
// Report formats

inline constexpr std::string_view kMetricTsvHeader =
    "pair_id\tsari\tnorm_edit_distance\tlength_change_pct\tjaccard\tembed_similarity";

inline json to_json(const MetricVector& mv) {
  json j;
  j["pair_id"] = mv.pair_id;
  j["sari"] = mv.sari ? json(*mv.sari) : json(nullptr);
  j["norm_edit_distance"] = mv.norm_edit_distance;
  j["length_change_pct"] = mv.length_change_pct;
  j["jaccard"] = mv.jaccard;
  j["embed_similarity"] = mv.embed_similarity ? json(mv.embed_similarity->score) : json(nullptr);
  j["embed_provider"] = mv.embed_similarity ? json(mv.embed_similarity->provider) : json(nullptr);
  return j;
}

inline MetricVector metric_vector_from_json(const json& j) {
  MetricVector mv;
  mv.pair_id = corpus::detail::require_string(j, "pair_id");
  auto num = [&](const char* f) {
    const auto& v = corpus::detail::require(j, f);
    if (!v.is_number()) throw ValidationError(std::string("field '") + f + "' must be a number");
    return v.get<double>();
  };
  if (auto it = j.find("sari"); it != j.end() && !it->is_null()) mv.sari = it->get<double>();
  mv.norm_edit_distance = num("norm_edit_distance");
  mv.length_change_pct = num("length_change_pct");
  mv.jaccard = num("jaccard");
  if (auto it = j.find("embed_similarity"); it != j.end() && !it->is_null()) {
    std::string provider;
    if (auto p = j.find("embed_provider"); p != j.end() && p->is_string()) provider = p->get<std::string>();
    mv.embed_similarity = Similarity{it->get<double>(), provider};
  }
  return mv;
}

/// Shortest round-trip decimal form, identical to what the JSON writer emits.
inline std::string format_number(double v) { return json(v).dump(); }

inline std::string to_tsv_row(const MetricVector& mv) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  std::string row = mv.pair_id;
  row += '\t' + opt(mv.sari);
  row += '\t' + format_number(mv.norm_edit_distance);
  row += '\t' + format_number(mv.length_change_pct);
  row += '\t' + format_number(mv.jaccard);
  row += '\t' + opt(mv.embed_similarity ? std::optional<double>(mv.embed_similarity->score) : std::nullopt);
  return row;
}

inline std::vector<MetricVector> load_metric_vectors(const std::filesystem::path& path) {
  std::vector<MetricVector> out;
  io::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(metric_vector_from_json(j)); });
  return out;
}

}  // namespace simpfact::metrics
