#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simpfact/text.hpp"

namespace simpfact::metrics {

/// Unit-cost Levenshtein distance (insert, delete, substitute) between two
/// sequences. Two-row dynamic program, O(|a|·|b|) time, O(|b|) space.
template <typename T>
std::size_t levenshtein(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t up = row[j + 1];
      const std::size_t sub = diag + (a[i] == b[j] ? 0 : 1);
      row[j + 1] = std::min({up + 1, row[j] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  return levenshtein(std::span<const T>(a), std::span<const T>(b));
}

enum class EditUnit { token, character };

/// Levenshtein distance divided by the longer length, in the chosen unit.
/// Both units lowercase first; characters are Unicode code points.
/// Returns 0 when both inputs are empty.
inline double normalized_edit_distance(std::string_view a, std::string_view b,
                                       EditUnit unit = EditUnit::token) {
  std::size_t dist = 0;
  std::size_t longest = 0;
  if (unit == EditUnit::token) {
    const auto ta = token_strings(a);
    const auto tb = token_strings(b);
    dist = levenshtein(ta, tb);
    longest = std::max(ta.size(), tb.size());
  } else {
    const auto ca = decode_utf8(to_lower(a));
    const auto cb = decode_utf8(to_lower(b));
    dist = levenshtein(ca, cb);
    longest = std::max(ca.size(), cb.size());
  }
  return longest == 0 ? 0.0 : static_cast<double>(dist) / static_cast<double>(longest);
}

}  // namespace simpfact::metrics
