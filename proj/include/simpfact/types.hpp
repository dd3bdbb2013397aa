#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "simpfact/error.hpp"

namespace simpfact {

/// Annotated error severity. Values match the labels annotators submit:
/// 0 no/trivial change, 1 nontrivial but main idea preserved, 2 main idea
/// not preserved, -1 gibberish.
enum class Severity : std::int8_t { none = 0, minor = 1, major = 2, gibberish = -1 };

inline constexpr std::array<Severity, 4> kAllSeverities{Severity::none, Severity::minor,
                                                        Severity::major, Severity::gibberish};

constexpr int to_int(Severity s) noexcept { return static_cast<int>(s); }

/// Ordinal position used for agreement and correlation: gibberish ranks as the
/// most severe outcome.
constexpr int ordinal_rank(Severity s) noexcept {
  return s == Severity::gibberish ? 3 : static_cast<int>(s);
}

constexpr bool is_valid_severity(long long v) noexcept { return v >= -1 && v <= 2; }

inline Severity severity_from_int(long long v) {
  if (!is_valid_severity(v)) {
    throw ValidationError("invalid severity label " + std::to_string(v) +
                          " (expected one of 0, 1, 2, -1)");
  }
  return static_cast<Severity>(v);
}

enum class Category : std::uint8_t { insertion, deletion, substitution };

inline constexpr std::array<Category, 3> kAllCategories{Category::insertion, Category::deletion,
                                                        Category::substitution};

constexpr std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::insertion:
      return "insertion";
    case Category::deletion:
      return "deletion";
    case Category::substitution:
      return "substitution";
  }
  return "?";
}

inline Category category_from_string(std::string_view name) {
  for (auto c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  throw ValidationError("unknown category '" + std::string(name) + "'");
}

/// Per-category triple, indexed by Category.
template <typename T>
struct PerCategory {
  std::array<T, 3> values{};

  T& operator[](Category c) noexcept { return values[static_cast<std::size_t>(c)]; }
  const T& operator[](Category c) const noexcept { return values[static_cast<std::size_t>(c)]; }
  bool operator==(const PerCategory&) const = default;
};

/// Majority outcome for one category; empty when no label reached a majority.
using Outcome = std::optional<Severity>;

}  // namespace simpfact
