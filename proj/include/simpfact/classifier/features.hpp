#pragma once

#include <array>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "simpfact/corpus.hpp"
#include "simpfact/edit_distance.hpp"
#include "simpfact/embedding.hpp"
#include "simpfact/perturb/generators.hpp"
#include "simpfact/text.hpp"

namespace simpfact::classifier {

inline constexpr std::size_t kFeatureDim = 12;

/// Dimension order is part of the model format; append, never reorder.
inline constexpr std::array<std::string_view, kFeatureDim> kFeatureNames{
    "length_change_pct", "norm_edit_distance_token", "norm_edit_distance_char", "jaccard",
    "unigram_addition",  "bigram_addition",          "unigram_deletion",        "bigram_deletion",
    "numeric_mismatch",  "negation_mismatch",        "provider_similarity",     "provider_present"};

using FeatureVector = std::array<double, kFeatureDim>;

namespace detail {

// Share of `of`'s n-grams (counted with multiplicity) absent from `in`.
inline double absent_share(const std::vector<std::string>& of, const std::vector<std::string>& in, std::size_t n) {
  if (of.size() < n) return 0.0;
  auto gram = [](const std::vector<std::string>& t, std::size_t i, std::size_t n) {
    std::string g = t[i];
    for (std::size_t k = 1; k < n; ++k) g.append("\x1f").append(t[i + k]);
    return g;
  };
  std::set<std::string> present;
  for (std::size_t i = 0; i + n <= in.size(); ++i) present.insert(gram(in, i, n));
  std::size_t absent = 0, total = 0;
  for (std::size_t i = 0; i + n <= of.size(); ++i, ++total) {
    if (!present.count(gram(of, i, n))) ++absent;
  }
  return static_cast<double>(absent) / static_cast<double>(total);
}

inline std::vector<std::string> numerals(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (perturb::is_numeric_literal(t)) out.push_back(t);
  }
  return out;
}

inline std::size_t negation_count(const std::vector<std::string>& tokens) {
  std::size_t n = 0;
  for (const auto& raw : tokens) {
    const auto t = perturb::detail::replace_apostrophes(raw);
    if (t == "not" || t == "never" || t == "no" || t == "cannot" || (t.size() > 3 && t.ends_with("n't"))) ++n;
  }
  return n;
}

}  // namespace detail

/// Surface features of a (source, target) pair. Tokens are lowercased. The
/// provider dimension is 0 with a 0 presence flag when no provider is given
/// or the similarity is undefined.
inline FeatureVector extract_features(std::string_view source, std::string_view target,
                                      const metrics::EmbeddingProvider* provider = nullptr) {
  const auto s = token_strings(source);
  const auto t = token_strings(target);
  FeatureVector f{};
  f[0] = s.empty() ? 0.0
                   : 100.0 * (static_cast<double>(t.size()) - static_cast<double>(s.size())) /
                         static_cast<double>(s.size());
  f[1] = metrics::normalized_edit_distance(source, target, metrics::EditUnit::token);
  f[2] = metrics::normalized_edit_distance(source, target, metrics::EditUnit::character);
  f[3] = corpus::token_set_jaccard(source, target, true);
  f[4] = detail::absent_share(t, s, 1);
  f[5] = detail::absent_share(t, s, 2);
  f[6] = detail::absent_share(s, t, 1);
  f[7] = detail::absent_share(s, t, 2);

  const auto ns = detail::numerals(s), nt = detail::numerals(t);
  std::size_t mismatch = ns.size() > nt.size() ? ns.size() - nt.size() : nt.size() - ns.size();
  for (std::size_t i = 0; i < std::min(ns.size(), nt.size()); ++i) mismatch += ns[i] != nt[i];
  f[8] = static_cast<double>(mismatch);
  f[9] = detail::negation_count(s) != detail::negation_count(t) ? 1.0 : 0.0;

  if (provider) {
    try {
      f[10] = metrics::embed_similarity(source, target, *provider).score;
      f[11] = 1.0;
    } catch (const DegenerateInputError&) {
      // undefined similarity (empty text) is encoded like a missing provider
    }
  }
  return f;
}

inline FeatureVector extract_features(const corpus::SentencePair& pair,
                                      const metrics::EmbeddingProvider* provider = nullptr) {
  return extract_features(pair.complex_text, pair.simple_text, provider);
}

}  // namespace simpfact::classifier
