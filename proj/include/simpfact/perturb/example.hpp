#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

#include <json.hpp>

#include "simpfact/corpus.hpp"
#include "simpfact/io.hpp"
#include "simpfact/types.hpp"

namespace simpfact::perturb {

using json = nlohmann::json;

enum class Generator { name_insertion, phrase_insertion, number_alteration, statement_negation, mask_fill };

inline constexpr std::array<Generator, 5> kAllGenerators{Generator::name_insertion, Generator::phrase_insertion,
                                                         Generator::number_alteration,
                                                         Generator::statement_negation, Generator::mask_fill};

constexpr std::string_view to_string(Generator g) noexcept {
  switch (g) {
    case Generator::name_insertion:
      return "name_insertion";
    case Generator::phrase_insertion:
      return "phrase_insertion";
    case Generator::number_alteration:
      return "number_alteration";
    case Generator::statement_negation:
      return "statement_negation";
    case Generator::mask_fill:
      return "mask_fill";
  }
  return "?";
}

inline Generator generator_from_string(std::string_view s) {
  for (auto g : kAllGenerators) {
    if (to_string(g) == s) return g;
  }
  throw ValidationError("unknown generator '" + std::string(s) + "'");
}

constexpr Category category_of(Generator g) noexcept {
  return g == Generator::name_insertion || g == Generator::phrase_insertion ? Category::insertion
                                                                            : Category::substitution;
}

/// A synthetic training pair: `target_text` carries an error of `category`
/// and `severity` relative to `source_text`.
struct PerturbedExample {
  std::string source_text;
  std::string target_text;
  Category category = Category::insertion;
  Severity severity = Severity::minor;
  Generator generator = Generator::name_insertion;
  std::string pair_id;            // original pair
  json params = json::object();   // generator parameters used

  bool operator==(const PerturbedExample&) const = default;
};

inline json to_json(const PerturbedExample& e) {
  return {{"source_text", e.source_text},
          {"target_text", e.target_text},
          {"category", to_string(e.category)},
          {"severity", to_int(e.severity)},
          {"generator", to_string(e.generator)},
          {"provenance", {{"pair_id", e.pair_id}, {"params", e.params}}}};
}

inline PerturbedExample perturbed_from_json(const json& j) {
  PerturbedExample e;
  e.source_text = corpus::detail::require_string(j, "source_text");
  e.target_text = corpus::detail::require_string(j, "target_text");
  e.category = category_from_string(corpus::detail::require_string(j, "category"));
  e.severity = corpus::detail::require_severity(j, "severity");
  e.generator = generator_from_string(corpus::detail::require_string(j, "generator"));
  const auto& prov = corpus::detail::require(j, "provenance");
  e.pair_id = corpus::detail::require_string(prov, "pair_id");
  if (auto it = prov.find("params"); it != prov.end()) e.params = *it;
  return e;
}

// ---------------------------------------------------------------------------
// Randomness. std::mt19937_64 is fully specified by the standard; the
// distributions are not, so draws go through these helpers instead.

/// Generator seeded from the run seed plus a string key, so results do not
/// depend on the order in which sentences are processed.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::string_view key) {
  const auto h = io::fnv1a(std::to_string(seed) + "\x1f" + std::string(key));
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Fisher–Yates with `uniform_below`.
template <typename T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
  }
}

}  // namespace simpfact::perturb
