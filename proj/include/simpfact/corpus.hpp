#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "simpfact/error.hpp"
#include "simpfact/io.hpp"
#include "simpfact/text.hpp"
#include "simpfact/types.hpp"

namespace simpfact::corpus {

using json = nlohmann::json;

enum class OriginKind { reference, system };
enum class Split { train, validation, test, unsplit };

/// Where a pair came from: a simplification dataset ("reference") or a
/// model's output ("system"), plus the dataset or system name.
struct Origin {
  OriginKind kind = OriginKind::reference;
  std::string name;

  bool operator==(const Origin&) const = default;
};

inline std::string_view to_string(OriginKind k) noexcept {
  return k == OriginKind::reference ? "reference" : "system";
}

inline std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
    case Split::unsplit:
      return "unsplit";
  }
  return "unsplit";
}

inline OriginKind origin_kind_from_string(std::string_view s) {
  if (s == "reference") return OriginKind::reference;
  if (s == "system") return OriginKind::system;
  throw ValidationError("unknown origin kind '" + std::string(s) + "'");
}

inline Split split_from_string(std::string_view s) {
  for (auto v : {Split::train, Split::validation, Split::test, Split::unsplit}) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

struct SentencePair {
  std::string id;
  std::string complex_text;
  std::string simple_text;
  Origin origin;
  Split split = Split::unsplit;
  json extra = json::object();  // unknown record fields, kept for round-trips

  bool operator==(const SentencePair&) const = default;
};

/// One annotator's three category labels for one pair.
struct AnnotationVote {
  std::string pair_id;
  std::string annotator_id;
  PerCategory<Severity> labels{};
  std::int64_t submitted_at = 0;  // seconds since the epoch, UTC
  json extra = json::object();

  Severity label(Category c) const noexcept { return labels[c]; }
  bool operator==(const AnnotationVote&) const = default;
};

// ---------------------------------------------------------------------------
// JSON-lines records

namespace detail {

inline json split_known(const json& record, std::initializer_list<std::string_view> known) {
  if (!record.is_object()) throw ValidationError("record is not a JSON object");
  json extra = json::object();
  for (auto it = record.begin(); it != record.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) extra[it.key()] = it.value();
  }
  return extra;
}

inline const json& require(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end()) throw ValidationError(std::string("missing field '") + field + "'");
  return *it;
}

inline std::string require_string(const json& record, const char* field) {
  const auto& v = require(record, field);
  if (!v.is_string()) throw ValidationError(std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

inline Severity require_severity(const json& record, const char* field) {
  const auto& v = require(record, field);
  if (!v.is_number_integer()) throw ValidationError(std::string("field '") + field + "' must be an integer");
  return severity_from_int(v.get<long long>());
}

}  // namespace detail

inline json to_json(const SentencePair& p) {
  json j = p.extra;
  j["id"] = p.id;
  j["complex_text"] = p.complex_text;
  j["simple_text"] = p.simple_text;
  j["origin"] = {{"kind", to_string(p.origin.kind)}, {"name", p.origin.name}};
  j["split"] = to_string(p.split);
  return j;
}

inline void validate(const SentencePair& p) {
  if (p.id.empty()) throw ValidationError("pair id is empty");
  if (trim(p.complex_text).empty()) throw ValidationError("pair '" + p.id + "': complex_text is empty");
  if (trim(p.simple_text).empty()) throw ValidationError("pair '" + p.id + "': simple_text is empty");
}

inline SentencePair pair_from_json(const json& j) {
  SentencePair p;
  p.extra = detail::split_known(j, {"id", "complex_text", "simple_text", "origin", "split"});
  p.id = detail::require_string(j, "id");
  p.complex_text = detail::require_string(j, "complex_text");
  p.simple_text = detail::require_string(j, "simple_text");
  if (auto it = j.find("origin"); it != j.end()) {
    if (!it->is_object()) throw ValidationError("field 'origin' must be an object");
    p.origin.kind = origin_kind_from_string(detail::require_string(*it, "kind"));
    p.origin.name = detail::require_string(*it, "name");
  }
  if (auto it = j.find("split"); it != j.end()) {
    if (!it->is_string()) throw ValidationError("field 'split' must be a string");
    p.split = split_from_string(it->get<std::string>());
  }
  validate(p);
  return p;
}

inline json to_json(const AnnotationVote& v) {
  json j = v.extra;
  j["pair_id"] = v.pair_id;
  j["annotator_id"] = v.annotator_id;
  for (auto c : kAllCategories) j[std::string(to_string(c))] = to_int(v.labels[c]);
  j["submitted_at"] = v.submitted_at;
  return j;
}

inline AnnotationVote vote_from_json(const json& j) {
  AnnotationVote v;
  v.extra = detail::split_known(
      j, {"pair_id", "annotator_id", "insertion", "deletion", "substitution", "submitted_at"});
  v.pair_id = detail::require_string(j, "pair_id");
  v.annotator_id = detail::require_string(j, "annotator_id");
  for (auto c : kAllCategories) {
    v.labels[c] = detail::require_severity(j, std::string(to_string(c)).c_str());
  }
  if (auto it = j.find("submitted_at"); it != j.end()) {
    if (!it->is_number_integer()) throw ValidationError("field 'submitted_at' must be an integer");
    v.submitted_at = it->get<std::int64_t>();
  }
  return v;
}

/// Rejects duplicate pair ids.
inline void check_unique_ids(const std::vector<SentencePair>& pairs) {
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs) {
    if (!seen.insert(p.id).second) throw ValidationError("duplicate pair id '" + p.id + "'");
  }
}

/// Rejects a second vote by the same annotator on the same pair.
inline void check_unique_votes(const std::vector<AnnotationVote>& votes) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& v : votes) {
    if (!seen.emplace(v.pair_id, v.annotator_id).second) {
      throw ValidationError("duplicate vote by '" + v.annotator_id + "' on pair '" + v.pair_id + "'");
    }
  }
}

inline std::vector<SentencePair> load_pairs(const std::filesystem::path& path) {
  std::vector<SentencePair> pairs;
  io::for_each_jsonl(path, [&](const json& j, std::size_t) { pairs.push_back(pair_from_json(j)); });
  try {
    check_unique_ids(pairs);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return pairs;
}

inline std::vector<AnnotationVote> load_votes(const std::filesystem::path& path) {
  std::vector<AnnotationVote> votes;
  io::for_each_jsonl(path, [&](const json& j, std::size_t) { votes.push_back(vote_from_json(j)); });
  try {
    check_unique_votes(votes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return votes;
}

inline std::string pairs_to_jsonl(const std::vector<SentencePair>& pairs) {
  return io::to_jsonl(pairs, [](const SentencePair& p) { return to_json(p); });
}

inline std::string votes_to_jsonl(const std::vector<AnnotationVote>& votes) {
  return io::to_jsonl(votes, [](const AnnotationVote& v) { return to_json(v); });
}

inline void save_pairs(const std::filesystem::path& path, const std::vector<SentencePair>& pairs) {
  io::write_file(path, pairs_to_jsonl(pairs));
}

inline void save_votes(const std::filesystem::path& path, const std::vector<AnnotationVote>& votes) {
  io::write_file(path, votes_to_jsonl(votes));
}

// ---------------------------------------------------------------------------
// Line-aligned parallel text

/// Builds pair i from line i of each file. Ids are "<origin name>:<line>",
/// 1-based.
inline std::vector<SentencePair> load_parallel_corpus(const std::filesystem::path& complex_path,
                                                      const std::filesystem::path& simple_path,
                                                      const Origin& origin,
                                                      Split split = Split::unsplit) {
  const auto complex_lines = io::read_lines(complex_path);
  const auto simple_lines = io::read_lines(simple_path);
  if (complex_lines.size() != simple_lines.size()) {
    throw AlignmentError(complex_lines.size(), simple_lines.size());
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(complex_lines.size());
  for (std::size_t i = 0; i < complex_lines.size(); ++i) {
    SentencePair p;
    p.id = origin.name + ":" + std::to_string(i + 1);
    p.complex_text = complex_lines[i];
    p.simple_text = simple_lines[i];
    p.origin = origin;
    p.split = split;
    if (trim(p.complex_text).empty()) {
      throw ValidationError(complex_path.string() + ":" + std::to_string(i + 1) + ": empty line");
    }
    if (trim(p.simple_text).empty()) {
      throw ValidationError(simple_path.string() + ":" + std::to_string(i + 1) + ": empty line");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Alignment-noise filter

/// Counts sentences as runs of '.', '!' or '?' that end the text or are
/// followed by whitespace (closing quotes and brackets may sit in between).
/// Never returns less than 1. "3.5" and "U.S.-based" contribute nothing.
inline std::size_t count_sentences(std::string_view text) {
  std::size_t count = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (text[i] == '.' || text[i] == '!' || text[i] == '?') {
      std::size_t j = i;
      while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
      std::size_t k = j;
      while (k < n && (text[k] == '"' || text[k] == '\'' || text[k] == ')' || text[k] == ']')) ++k;
      if (k == n || is_space(text[k])) ++count;
      i = j;
    } else {
      ++i;
    }
  }
  return std::max<std::size_t>(count, 1);
}

struct NoiseFilterOptions {
  double single_sentence_min = 0.4;
  double multi_sentence_min = 0.2;
  bool lowercase = true;
  std::function<std::size_t(std::string_view)> sentence_counter = count_sentences;
};

/// Token-set Jaccard similarity; 1.0 when both sides have no tokens.
inline double token_set_jaccard(std::string_view a, std::string_view b, bool lowercase = true) {
  const auto ta = token_strings(a, lowercase);
  const auto tb = token_strings(b, lowercase);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

inline bool passes_noise_filter(const SentencePair& p, const NoiseFilterOptions& opts = {}) {
  const double jac = token_set_jaccard(p.complex_text, p.simple_text, opts.lowercase);
  const double threshold =
      opts.sentence_counter(p.simple_text) > 1 ? opts.multi_sentence_min : opts.single_sentence_min;
  return jac >= threshold;
}

/// Keeps pairs whose token-set Jaccard clears 0.4 (one-sentence simple side)
/// or 0.2 (longer simple side). Input order is preserved.
inline std::vector<SentencePair> noise_filter(const std::vector<SentencePair>& pairs,
                                              const NoiseFilterOptions& opts = {}) {
  std::vector<SentencePair> kept;
  std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(kept),
               [&](const SentencePair& p) { return passes_noise_filter(p, opts); });
  return kept;
}

}  // namespace simpfact::corpus
