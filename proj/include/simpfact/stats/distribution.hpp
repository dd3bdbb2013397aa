#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "simpfact/error.hpp"
#include "simpfact/types.hpp"

namespace simpfact::stats {

/// Label shares over defined outcomes. Arrays are indexed by ordinal rank,
/// i.e. in the order 0, 1, 2, −1.
struct DistributionReport {
  std::array<std::size_t, 4> counts{};
  std::size_t n_defined = 0;
  std::size_t n_undefined = 0;

  /// Percentages, or empty when nothing was defined.
  std::optional<std::array<double, 4>> percentages() const {
    if (n_defined == 0) return std::nullopt;
    std::array<double, 4> pct{};
    for (std::size_t i = 0; i < 4; ++i) {
      pct[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(n_defined);
    }
    return pct;
  }
};

inline DistributionReport distribution_report(std::span<const Outcome> outcomes) {
  DistributionReport r;
  for (const auto& o : outcomes) {
    if (!o) {
      ++r.n_undefined;
      continue;
    }
    ++r.counts[static_cast<std::size_t>(ordinal_rank(*o))];
    ++r.n_defined;
  }
  return r;
}

struct LevelStat {
  std::size_t n = 0;
  double mean = 0;
  std::optional<double> stddev;  // sample (n−1) deviation; empty for n = 1
};

/// Per-level statistics indexed by ordinal rank (0, 1, 2, −1). Levels with no
/// observations are empty.
using StratifiedStats = std::array<std::optional<LevelStat>, 4>;

/// Mean and sample standard deviation of a metric within each label level.
/// Values whose label is undefined are ignored.
inline StratifiedStats stratified_stat(std::span<const double> values, std::span<const Outcome> labels) {
  if (values.size() != labels.size()) throw ContractError("values and labels differ in length");
  std::array<std::vector<double>, 4> groups;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (labels[i]) groups[static_cast<std::size_t>(ordinal_rank(*labels[i]))].push_back(values[i]);
  }
  StratifiedStats out;
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& xs = groups[g];
    if (xs.empty()) continue;
    LevelStat s;
    s.n = xs.size();
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
      double ss = 0;
      for (double x : xs) ss += (x - s.mean) * (x - s.mean);
      s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    out[g] = s;
  }
  return out;
}

}  // namespace simpfact::stats
