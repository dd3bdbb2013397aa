#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace simpfact {

// ---------------------------------------------------------------------------
// UTF-8

/// Byte offset of the first byte that does not start a well-formed UTF-8
/// sequence, or npos when the whole input is valid. Overlong encodings,
/// surrogates and code points above U+10FFFF are rejected.
inline std::size_t find_invalid_utf8(std::string_view s) noexcept {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

/// Decodes valid UTF-8 into code points. Invalid bytes decode as U+FFFD.
inline std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto rest = s.substr(i);
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || find_invalid_utf8(rest.substr(0, len)) != std::string_view::npos) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

// ---------------------------------------------------------------------------
// ASCII helpers. Non-ASCII bytes pass through untouched.

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

constexpr bool is_ascii_punct(char c) noexcept {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

constexpr bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
constexpr bool is_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }
constexpr bool is_lower(char c) noexcept { return c >= 'a' && c <= 'z'; }
constexpr bool is_alpha(char c) noexcept { return is_upper(c) || is_lower(c); }

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// ---------------------------------------------------------------------------
// Tokenizer

struct Token {
  std::string surface;
  std::size_t begin = 0;  // byte offset into the source text
  std::size_t end = 0;    // one past the last byte

  bool operator==(const Token&) const = default;
};

namespace detail {

// Length in bytes of a punctuation character starting at s[i], or 0. Covers
// ASCII punctuation plus the typographic quotes, dashes and ellipsis common in
// news and encyclopedia text.
inline std::size_t punct_len_at(std::string_view s, std::size_t i) noexcept {
  if (is_ascii_punct(s[i])) return 1;
  static constexpr std::string_view kWide[] = {
      "‘", "’", "“", "”", "–", "—", "…", "«", "»"};
  for (auto w : kWide) {
    if (s.substr(i, w.size()) == w) return w.size();
  }
  return 0;
}

// Same, for a punctuation character ending at s[end - 1].
inline std::size_t punct_len_before(std::string_view s, std::size_t end) noexcept {
  if (end == 0) return 0;
  if (is_ascii_punct(s[end - 1])) return 1;
  for (std::size_t len : {2u, 3u}) {
    if (end >= len && punct_len_at(s, end - len) == len) return len;
  }
  return 0;
}

}  // namespace detail

/// Splits on whitespace, then peels leading and trailing punctuation off each
/// chunk as single-character tokens. Internal punctuation stays attached, so
/// "U.S.-based" is one token and "Hello," is two. Case is preserved.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    std::size_t chunk_end = i;
    while (chunk_end < n && !is_space(text[chunk_end])) ++chunk_end;

    std::size_t b = i;
    std::size_t e = chunk_end;
    std::vector<Token> trailing;
    while (b < e) {
      const auto len = detail::punct_len_at(text, b);
      if (len == 0) break;
      tokens.push_back({std::string(text.substr(b, len)), b, b + len});
      b += len;
    }
    while (e > b) {
      const auto len = detail::punct_len_before(text, e);
      if (len == 0) break;
      trailing.push_back({std::string(text.substr(e - len, len)), e - len, e});
      e -= len;
    }
    if (b < e) tokens.push_back({std::string(text.substr(b, e - b)), b, e});
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
    i = chunk_end;
  }
  return tokens;
}

/// Token surfaces, optionally ASCII-lowercased. This is what every
/// token-level metric consumes.
inline std::vector<std::string> token_strings(std::string_view text, bool lowercase = true) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(lowercase ? to_lower(t.surface) : std::move(t.surface));
  return out;
}

/// True when every byte of the token is punctuation (ASCII or typographic).
inline bool is_punctuation_token(std::string_view tok) noexcept {
  if (tok.empty()) return false;
  std::size_t i = 0;
  while (i < tok.size()) {
    const auto len = detail::punct_len_at(tok, i);
    if (len == 0) return false;
    i += len;
  }
  return true;
}

}  // namespace simpfact
