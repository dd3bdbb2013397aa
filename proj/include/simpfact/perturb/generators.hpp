#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simpfact/embedding.hpp"
#include "simpfact/perturb/example.hpp"
#include "simpfact/perturb/lexicon.hpp"
#include "simpfact/perturb/masked_lm.hpp"
#include "simpfact/text.hpp"

namespace simpfact::perturb {

namespace detail {

inline std::string splice(std::string_view text, std::size_t begin, std::size_t end, std::string_view repl) {
  std::string out;
  out.reserve(text.size() + repl.size());
  out.append(text.substr(0, begin)).append(repl).append(text.substr(end));
  return out;
}

inline bool is_terminal(std::string_view tok) { return tok == "." || tok == "!" || tok == "?" || tok == "…"; }

// True for tokens at the start of a sentence: the first word of the text or
// the first word after a terminal mark. Opening quotes and brackets do not
// end the sentence-initial state.
inline std::vector<bool> sentence_initial(const std::vector<Token>& tokens) {
  std::vector<bool> out(tokens.size(), false);
  bool initial = true;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& s = tokens[i].surface;
    if (is_punctuation_token(s)) {
      if (is_terminal(s)) initial = true;
      continue;
    }
    out[i] = initial;
    initial = false;
  }
  return out;
}

inline std::set<std::string> lower_word_set(std::string_view text) {
  std::set<std::string> out;
  for (auto& t : token_strings(text)) {
    if (!is_punctuation_token(t)) out.insert(std::move(t));
  }
  return out;
}

// Swap construction requires the target to contribute a word the source lacks.
inline bool adds_new_word(std::string_view source, std::string_view target) {
  const auto src = lower_word_set(source);
  for (const auto& w : lower_word_set(target)) {
    if (!src.count(w)) return true;
  }
  return false;
}

inline std::string match_case(std::string_view word, std::string_view model) {
  std::string out(word);
  if (!model.empty() && !out.empty() && is_upper(model[0])) out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

inline std::string replace_apostrophes(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 3) == "’") {
      out += '\'';
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Name insertion

/// A detected person name as a byte range of the source text.
struct NameSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool possessive = false;
  bool sentence_initial = false;

  bool operator==(const NameSpan&) const = default;
};

namespace detail {

// "Maria", "Jean-Luc", "O'Neil"; returns the base without a possessive 's.
inline std::optional<std::pair<std::string, bool>> title_case_word(std::string_view w) {
  bool possessive = false;
  if (w.size() > 2 && w.substr(w.size() - 2) == "'s") {
    w.remove_suffix(2);
    possessive = true;
  } else if (w.size() > 4 && w.substr(w.size() - 4) == "’s") {
    w.remove_suffix(4);
    possessive = true;
  }
  if (w.size() < 2 || !is_upper(w[0])) return std::nullopt;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const char c = w[i];
    const bool after_joiner = w[i - 1] == '-' || w[i - 1] == '\'';
    if (is_lower(c) || c == '-' || c == '\'' || (after_joiner && is_upper(c))) continue;
    return std::nullopt;
  }
  if (w.back() == '-' || w.back() == '\'') return std::nullopt;
  return std::make_pair(std::string(w), possessive);
}

}  // namespace detail

/// Runs of title-case words that are headed by a known first name, or that
/// are at least two words long and not sentence-initial. Month and day names
/// and a few honorifics never count; runs with a place word are skipped.
inline std::vector<NameSpan> detect_names(std::string_view text) {
  const auto tokens = tokenize(text);
  const auto initial = detail::sentence_initial(tokens);
  std::vector<NameSpan> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::vector<std::size_t> run;
    bool possessive = false;
    for (std::size_t j = i; j < tokens.size(); ++j) {
      const auto tc = detail::title_case_word(tokens[j].surface);
      if (!tc || lexicon::is_stopword(tc->first)) break;
      if (!run.empty() && initial[j]) break;
      run.push_back(j);
      if (tc->second) {
        possessive = true;
        break;
      }
    }
    if (run.empty()) {
      ++i;
      continue;
    }
    i = run.back() + 1;
    const auto head = detail::title_case_word(tokens[run.front()].surface)->first;
    if (initial[run.front()] && !lexicon::is_first_name(head)) {
      run.erase(run.begin());
      if (run.empty()) continue;
    }
    const auto first = detail::title_case_word(tokens[run.front()].surface)->first;
    if (!lexicon::is_first_name(first) && run.size() < 2) continue;
    if (std::any_of(run.begin(), run.end(), [&](std::size_t k) {
          return lexicon::is_place_word(detail::title_case_word(tokens[k].surface)->first);
        })) {
      continue;
    }
    out.push_back({tokens[run.front()].begin, tokens[run.back()].end, possessive, initial[run.front()]});
  }
  return out;
}

/// One example per name: the name becomes "they" (or "their"), and the pair
/// is swapped so the original name is the inserted fact.
inline std::vector<PerturbedExample> gen_name_insertion(std::string_view source, std::span<const NameSpan> names,
                                                        std::string_view pair_id = {}) {
  std::vector<PerturbedExample> out;
  for (const auto& n : names) {
    if (n.begin >= n.end || n.end > source.size()) throw ContractError("name span outside the text");
    const bool cap = n.sentence_initial || n.begin == 0;
    std::string pronoun = n.possessive ? "their" : "they";
    if (cap) pronoun[0] = 'T';
    auto replaced = detail::splice(source, n.begin, n.end, pronoun);
    if (!detail::adds_new_word(replaced, source)) continue;
    PerturbedExample e;
    e.source_text = std::move(replaced);
    e.target_text = std::string(source);
    e.category = Category::insertion;
    e.severity = Severity::minor;
    e.generator = Generator::name_insertion;
    e.pair_id = std::string(pair_id);
    e.params = {{"name", std::string(source.substr(n.begin, n.end - n.begin))}, {"pronoun", pronoun}};
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<PerturbedExample> gen_name_insertion(std::string_view source, std::string_view pair_id = {}) {
  const auto names = detect_names(source);
  return gen_name_insertion(source, names, pair_id);
}

// ---------------------------------------------------------------------------
// Phrase insertion

struct PhraseOptions {
  double level1_low = 0.6;
  double level1_high = 0.8;
  double level2_low = 0.2;
  double level2_high = 0.4;
  std::size_t min_window = 3;
  std::size_t max_window = 8;
};

/// Candidate deletion as an inclusive token range.
struct PhraseCandidate {
  std::size_t first = 0;
  std::size_t last = 0;
  std::string kind;  // "chunk", "parenthetical" or "window"

  bool operator==(const PhraseCandidate&) const = default;
};

namespace detail {

inline bool is_delimiter(std::string_view tok) {
  return tok == "," || tok == ";" || tok == ":" || tok == "(" || tok == ")" || tok == "–" || tok == "—" ||
         tok == "-";
}

// Removes bytes [begin, end) and repairs the spacing around the cut.
inline std::string cut(std::string_view text, std::size_t begin, std::size_t end) {
  const auto joined = splice(text, begin, end, " ");
  std::string out;
  for (char c : joined) {
    if (is_space(c)) {
      if (!out.empty() && out.back() != ' ' && out.back() != '(' && out.back() != '[') out += ' ';
      continue;
    }
    if (!out.empty() && out.back() == ' ' &&
        (c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' || c == ']')) {
      out.pop_back();
    }
    out += c;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  std::size_t lead = 0;
  while (lead < out.size() && (is_ascii_punct(out[lead]) && out[lead] != '"' && out[lead] != '(')) ++lead;
  while (lead < out.size() && out[lead] == ' ') ++lead;
  out.erase(0, lead);
  if (begin == 0 && !out.empty() && is_lower(out[0]) && !text.empty() && is_upper(text[0])) {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

}  // namespace detail

/// Punctuation-delimited chunks (with one adjoining delimiter), bracketed
/// parentheticals and word-bounded windows of `min_window`..`max_window`
/// tokens. Deduplicated by range, in a fixed order.
inline std::vector<PhraseCandidate> phrase_candidates(const std::vector<Token>& tokens, const PhraseOptions& opts = {}) {
  std::vector<PhraseCandidate> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  auto add = [&](std::size_t f, std::size_t l, const char* kind) {
    if (seen.insert({f, l}).second) out.push_back({f, l, kind});
  };
  const std::size_t n = tokens.size();
  auto punct = [&](std::size_t i) { return is_punctuation_token(tokens[i].surface); };

  bool has_delim = false;
  for (const auto& t : tokens) has_delim = has_delim || detail::is_delimiter(t.surface);
  if (has_delim) {
    std::size_t i = 0;
    while (i < n) {
      if (punct(i)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < n && !detail::is_delimiter(tokens[j + 1].surface) && !detail::is_terminal(tokens[j + 1].surface)) ++j;
      std::size_t last_word = j;
      while (last_word > i && punct(last_word)) --last_word;
      if (i > 0 && detail::is_delimiter(tokens[i - 1].surface) && tokens[i - 1].surface != "(") {
        add(i - 1, last_word, "chunk");
      } else if (j + 1 < n && detail::is_delimiter(tokens[j + 1].surface) && tokens[j + 1].surface != ")") {
        add(i, j + 1, "chunk");
      }
      i = j + 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (tokens[i].surface != "(") continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (tokens[j].surface == ")") {
        add(i, j, "parenthetical");
        break;
      }
    }
  }
  for (std::size_t len = opts.min_window; len <= opts.max_window; ++len) {
    for (std::size_t s = 0; s + len <= n; ++s) {
      if (!punct(s) && !punct(s + len - 1)) add(s, s + len - 1, "window");
    }
  }
  return out;
}

/// Deletes each candidate phrase, scores the shorter text against the
/// original and keeps it when the score falls inside a severity band.
inline std::vector<PerturbedExample> gen_phrase_insertion(std::string_view source,
                                                          const metrics::EmbeddingProvider& provider,
                                                          std::string_view pair_id = {},
                                                          const PhraseOptions& opts = {}) {
  if (opts.min_window == 0 || opts.min_window > opts.max_window) throw ContractError("invalid phrase window bounds");
  const auto tokens = tokenize(source);
  std::vector<PerturbedExample> out;
  if (tokens.size() < opts.min_window) return out;
  std::set<std::string> produced;
  for (const auto& c : phrase_candidates(tokens, opts)) {
    auto shorter = detail::cut(source, tokens[c.first].begin, tokens[c.last].end);
    if (detail::lower_word_set(shorter).empty() || shorter == source) continue;
    if (!detail::adds_new_word(shorter, source)) continue;
    if (!produced.insert(shorter).second) continue;
    const double s = metrics::embed_similarity(shorter, source, provider).score;
    Severity sev;
    if (s >= opts.level1_low && s <= opts.level1_high) {
      sev = Severity::minor;
    } else if (s >= opts.level2_low && s <= opts.level2_high) {
      sev = Severity::major;
    } else {
      continue;
    }
    PerturbedExample e;
    e.params = {{"phrase", std::string(source.substr(tokens[c.first].begin, tokens[c.last].end - tokens[c.first].begin))},
                {"candidate", c.kind},
                {"score", s},
                {"provider", provider.name()}};
    e.source_text = std::move(shorter);
    e.target_text = std::string(source);
    e.category = Category::insertion;
    e.severity = sev;
    e.generator = Generator::phrase_insertion;
    e.pair_id = std::string(pair_id);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Number alteration

/// Digits with optional internal "," or "." separators: "7", "1,200", "3.5".
inline bool is_numeric_literal(std::string_view tok) {
  if (tok.empty() || !is_digit(tok.front()) || !is_digit(tok.back())) return false;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const char c = tok[i];
    if (is_digit(c)) continue;
    if ((c == ',' || c == '.') && is_digit(tok[i - 1])) continue;
    return false;
  }
  return true;
}

/// Replaces the digits of `literal` with a uniformly drawn different number
/// of the same digit count, keeping separators in place. Multi-digit draws
/// have a nonzero leading digit.
inline std::string redraw_number(std::string_view literal, std::mt19937_64& rng) {
  std::string digits;
  for (char c : literal) {
    if (is_digit(c)) digits += c;
  }
  std::string drawn;
  do {
    drawn.clear();
    for (std::size_t i = 0; i < digits.size(); ++i) {
      const bool lead = i == 0 && digits.size() > 1;
      drawn += static_cast<char>('0' + (lead ? 1 + uniform_below(rng, 9) : uniform_below(rng, 10)));
    }
  } while (drawn == digits);
  std::string out(literal);
  std::size_t k = 0;
  for (auto& c : out) {
    if (is_digit(c)) c = drawn[k++];
  }
  return out;
}

inline std::vector<PerturbedExample> gen_number_alteration(std::string_view source, std::uint64_t seed,
                                                           std::string_view pair_id = {}) {
  std::vector<PerturbedExample> out;
  std::size_t literal = 0;
  for (const auto& t : tokenize(source)) {
    if (!is_numeric_literal(t.surface)) continue;
    auto rng = keyed_rng(seed, std::string(pair_id) + "\x1f" + std::string(source) + "\x1fnum" + std::to_string(literal));
    const auto repl = redraw_number(t.surface, rng);
    PerturbedExample e;
    e.source_text = std::string(source);
    e.target_text = detail::splice(source, t.begin, t.end, repl);
    e.category = Category::substitution;
    e.severity = Severity::minor;
    e.generator = Generator::number_alteration;
    e.pair_id = std::string(pair_id);
    e.params = {{"original", t.surface}, {"replacement", repl}, {"literal_index", literal}, {"seed", seed}};
    out.push_back(std::move(e));
    ++literal;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statement negation

inline constexpr std::array<std::string_view, 18> kAuxiliaries{
    "is", "are", "was", "were", "has", "have", "had", "do", "does", "did",
    "can", "could", "will", "would", "may", "might", "must", "should"};

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 19> kNegativeContractions{{
    {"isn't", "is"},       {"aren't", "are"},     {"wasn't", "was"},       {"weren't", "were"},
    {"hasn't", "has"},     {"haven't", "have"},   {"hadn't", "had"},       {"don't", "do"},
    {"doesn't", "does"},   {"didn't", "did"},     {"can't", "can"},        {"cannot", "can"},
    {"couldn't", "could"}, {"won't", "will"},     {"wouldn't", "would"},   {"mightn't", "might"},
    {"mustn't", "must"},   {"shouldn't", "should"}, {"mayn't", "may"}}};

/// Toggles each auxiliary in turn: "is" becomes "is not", "is not" becomes
/// "is", and a negative contraction becomes its positive form.
inline std::vector<PerturbedExample> gen_statement_negation(std::string_view source, std::string_view pair_id = {}) {
  const auto tokens = tokenize(source);
  std::vector<PerturbedExample> out;
  auto emit = [&](std::string target, const Token& aux, const char* action) {
    PerturbedExample e;
    e.source_text = std::string(source);
    e.target_text = std::move(target);
    e.category = Category::substitution;
    e.severity = Severity::minor;
    e.generator = Generator::statement_negation;
    e.pair_id = std::string(pair_id);
    e.params = {{"auxiliary", aux.surface}, {"action", action}};
    out.push_back(std::move(e));
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const auto lower = to_lower(detail::replace_apostrophes(t.surface));
    if (auto it = std::find_if(kNegativeContractions.begin(), kNegativeContractions.end(),
                               [&](const auto& p) { return p.first == lower; });
        it != kNegativeContractions.end()) {
      emit(detail::splice(source, t.begin, t.end, detail::match_case(it->second, t.surface)), t, "uncontract");
      continue;
    }
    if (std::find(kAuxiliaries.begin(), kAuxiliaries.end(), lower) == kAuxiliaries.end()) continue;
    if (i + 1 < tokens.size() && to_lower(tokens[i + 1].surface) == "not") {
      emit(detail::splice(source, t.end, tokens[i + 1].end, ""), t, "strip");
    } else {
      emit(detail::splice(source, t.end, t.end, " not"), t, "negate");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mask fill

enum class MaskMode { level1 = 1, level2 = 2 };

struct MaskOptions {
  bool include_punctuation = false;
};

/// Token indices that `gen_mask_fill` would mask, before any provider call.
/// Empty when the text is too short for the mode.
inline std::vector<std::size_t> mask_positions(const std::vector<Token>& tokens, MaskMode mode, std::mt19937_64& rng,
                                               const MaskOptions& opts = {}) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (opts.include_punctuation || !is_punctuation_token(tokens[i].surface)) eligible.push_back(i);
  }
  std::vector<std::size_t> out;
  if (mode == MaskMode::level1) {
    if (eligible.size() < 2) return out;
    const auto a = uniform_below(rng, eligible.size());
    auto b = uniform_below(rng, eligible.size() - 1);
    if (b >= a) ++b;
    out = {eligible[std::min(a, b)], eligible[std::max(a, b)]};
  } else {
    for (std::size_t k = 4; k < eligible.size(); k += 5) out.push_back(eligible[k]);
  }
  return out;
}

inline std::optional<PerturbedExample> gen_mask_fill(std::string_view source, const MaskedLanguageModel& provider,
                                                     MaskMode mode, std::uint64_t seed, std::string_view pair_id = {},
                                                     const MaskOptions& opts = {}) {
  const auto tokens = tokenize(source);
  auto rng = keyed_rng(seed, std::string(pair_id) + "\x1f" + std::string(source) + "\x1fmask" +
                                 std::to_string(static_cast<int>(mode)));
  const auto positions = mask_positions(tokens, mode, rng, opts);
  if (positions.empty()) return std::nullopt;
  const int rank = mode == MaskMode::level1 ? 3 : 5;

  std::string masked(source);
  for (auto it = positions.rbegin(); it != positions.rend(); ++it) {
    masked = detail::splice(masked, tokens[*it].begin, tokens[*it].end, kMaskToken);
  }
  std::vector<std::string> fills;
  const auto name = provider.name();
  try {
    fills = provider.fill(masked, positions, rank);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(name, e.what());
  }
  if (fills.size() != positions.size()) {
    throw ProviderError(name, "returned " + std::to_string(fills.size()) + " tokens for " +
                                  std::to_string(positions.size()) + " masks");
  }
  for (const auto& f : fills) {
    if (trim(f).empty()) throw ProviderError(name, "returned an empty token");
  }

  std::string target(source);
  for (std::size_t k = positions.size(); k-- > 0;) {
    target = detail::splice(target, tokens[positions[k]].begin, tokens[positions[k]].end, fills[k]);
  }
  if (target == source) return std::nullopt;
  PerturbedExample e;
  e.source_text = std::string(source);
  e.target_text = std::move(target);
  e.category = Category::substitution;
  e.severity = mode == MaskMode::level1 ? Severity::minor : Severity::major;
  e.generator = Generator::mask_fill;
  e.pair_id = std::string(pair_id);
  e.params = {{"mode", mode == MaskMode::level1 ? "level1" : "level2"},
              {"positions", positions},
              {"rank", rank},
              {"fills", fills},
              {"provider", name},
              {"seed", seed}};
  return e;
}

}  // namespace simpfact::perturb
