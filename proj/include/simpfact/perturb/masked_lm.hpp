#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simpfact/error.hpp"
#include "simpfact/io.hpp"

namespace simpfact::perturb {

inline constexpr std::string_view kMaskToken = "[MASK]";

/// Masked language model backend. `masked_text` is the source with each
/// masked token replaced by `[MASK]`; `positions` are the 0-based indices of
/// those tokens in the unmasked tokenization. Returns one token per position,
/// the `rank`-th (1-based) most likely filler. Must be deterministic.
class MaskedLanguageModel {
 public:
  virtual ~MaskedLanguageModel() = default;
  virtual std::string name() const = 0;
  virtual std::size_t max_parallelism() const { return 1; }
  virtual std::vector<std::string> fill(std::string_view masked_text, std::span<const std::size_t> positions,
                                        int rank) const = 0;
};

/// Offline stand-in: picks a word from a fixed vocabulary by hashing the
/// masked text, slot and rank.
class HashMaskedLM final : public MaskedLanguageModel {
 public:
  std::string name() const override { return "hash-mlm-stub"; }
  std::size_t max_parallelism() const override { return 64; }

  std::vector<std::string> fill(std::string_view masked_text, std::span<const std::size_t> positions,
                                int rank) const override {
    if (rank < 1) throw ContractError("mask-fill rank must be at least 1");
    static constexpr std::array<std::string_view, 32> kVocab{
        "the",   "a",     "new",    "old",   "city",  "year",   "people", "first",
        "large", "small", "river",  "team",  "game",  "school", "world",  "group",
        "north", "south", "early",  "later", "major", "local",  "public", "music",
        "house", "time",  "part",   "state", "film",  "war",    "church", "family"};
    std::vector<std::string> out;
    out.reserve(positions.size());
    for (auto pos : positions) {
      const auto h = io::fnv1a(std::string(masked_text) + "\x1f" + std::to_string(pos) + "\x1f" +
                               std::to_string(rank));
      out.emplace_back(kVocab[h % kVocab.size()]);
    }
    return out;
  }
};

}  // namespace simpfact::perturb
