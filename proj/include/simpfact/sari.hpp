#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "simpfact/error.hpp"
#include "simpfact/text.hpp"

namespace simpfact::metrics {

/// Per-order SARI components.
struct SariOrder {
  double add_precision = 0, add_recall = 0, add_f1 = 0;
  double keep_precision = 0, keep_recall = 0, keep_f1 = 0;
  double del_precision = 0;
};

struct SariBreakdown {
  std::array<SariOrder, 4> orders{};  // n = 1..4
  double score = 0;                   // 0..100
};

namespace detail {

using NgramSet = std::set<std::string>;

// n-grams as tokens joined by U+001F so that set order is lexicographic and
// stable.
inline NgramSet ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramSet out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      g += '\x1f';
      g += tokens[i + k];
    }
    out.insert(std::move(g));
  }
  return out;
}

inline double ratio(double num, double den) noexcept { return den == 0 ? 0.0 : num / den; }
inline double f1(double p, double r) noexcept { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

}  // namespace detail

/// SARI over lowercased token n-grams, n = 1..4.
///
/// With S, O the source and output n-gram sets, R the union of reference
/// n-gram sets and r(g) the fraction of references containing g:
///   ADD   precision |(O\S)∩R| / |O\S|, recall |(O\S)∩R| / |R\S|
///   KEEP  precision Σ_{O∩S} r(g) / |O∩S|, recall Σ_{O∩S} r(g) / Σ_S r(g)
///   DEL   precision Σ_{S\O} (1 - r(g)) / |S\O|
/// Every ratio with a zero denominator is 0, and F1 is 0 when P + R = 0.
/// The score is 100 × mean over n of (F1_add + F1_keep + P_del) / 3.
inline SariBreakdown sari_breakdown(std::string_view source, std::string_view output,
                                    const std::vector<std::string>& references) {
  if (references.empty()) throw ContractError("SARI needs at least one reference");
  const auto src_tokens = token_strings(source);
  const auto out_tokens = token_strings(output);
  std::vector<std::vector<std::string>> ref_tokens;
  for (const auto& r : references) ref_tokens.push_back(token_strings(r));
  const double m = static_cast<double>(references.size());

  SariBreakdown result;
  double total = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto S = detail::ngrams(src_tokens, n);
    const auto O = detail::ngrams(out_tokens, n);
    std::map<std::string, int> ref_count;
    for (const auto& rt : ref_tokens) {
      for (const auto& g : detail::ngrams(rt, n)) ++ref_count[g];
    }
    // Reference counts are summed as integers and divided by m once, so the
    // result does not depend on n-gram iteration order.
    auto count = [&](const std::string& g) {
      auto it = ref_count.find(g);
      return it == ref_count.end() ? 0 : it->second;
    };

    auto& o = result.orders[n - 1];

    double added = 0, added_good = 0;
    for (const auto& g : O) {
      if (S.count(g)) continue;
      added += 1;
      if (ref_count.count(g)) added_good += 1;
    }
    double ref_added = 0;
    for (const auto& [g, c] : ref_count) {
      if (!S.count(g)) ref_added += 1;
    }
    o.add_precision = detail::ratio(added_good, added);
    o.add_recall = detail::ratio(added_good, ref_added);
    o.add_f1 = detail::f1(o.add_precision, o.add_recall);

    long kept = 0, kept_refs = 0, source_refs = 0, deleted = 0, deleted_refs = 0;
    for (const auto& g : S) {
      const int c = count(g);
      source_refs += c;
      if (O.count(g)) {
        ++kept;
        kept_refs += c;
      } else {
        ++deleted;
        deleted_refs += c;
      }
    }
    const double kept_weight = static_cast<double>(kept_refs) / m;
    const double source_weight = static_cast<double>(source_refs) / m;
    const double deleted_good = static_cast<double>(deleted) - static_cast<double>(deleted_refs) / m;
    o.keep_precision = detail::ratio(kept_weight, static_cast<double>(kept));
    o.keep_recall = detail::ratio(kept_weight, source_weight);
    o.keep_f1 = detail::f1(o.keep_precision, o.keep_recall);
    o.del_precision = detail::ratio(deleted_good, static_cast<double>(deleted));

    total += (o.add_f1 + o.keep_f1 + o.del_precision) / 3.0;
  }
  result.score = 100.0 * total / 4.0;
  return result;
}

inline double sari(std::string_view source, std::string_view output,
                   const std::vector<std::string>& references) {
  return sari_breakdown(source, output, references).score;
}

struct SariItem {
  std::string source;
  std::string output;
  std::vector<std::string> references;
};

/// Corpus SARI as the mean of sentence-level scores.
inline double corpus_sari(const std::vector<SariItem>& items) {
  if (items.empty()) throw ContractError("corpus SARI over an empty corpus");
  double sum = 0;
  for (const auto& it : items) sum += sari(it.source, it.output, it.references);
  return sum / static_cast<double>(items.size());
}

}  // namespace simpfact::metrics
