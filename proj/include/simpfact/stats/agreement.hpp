#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simpfact/corpus.hpp"
#include "simpfact/error.hpp"
#include "simpfact/types.hpp"

namespace simpfact::stats {

/// The label cast by at least two of the three voters, or empty when all
/// three differ.
inline Outcome majority_label(std::span<const Severity> votes) {
  if (votes.size() != 3) {
    throw ContractError("majority label needs exactly 3 votes, got " + std::to_string(votes.size()));
  }
  if (votes[0] == votes[1] || votes[0] == votes[2]) return votes[0];
  if (votes[1] == votes[2]) return votes[1];
  return std::nullopt;
}

inline Outcome majority_label(std::initializer_list<Severity> votes) {
  return majority_label(std::span<const Severity>(votes.begin(), votes.size()));
}

/// Votes on one pair, in submission order.
struct VoteGroup {
  std::string pair_id;
  std::vector<corpus::AnnotationVote> votes;

  std::vector<Severity> labels(Category c) const {
    std::vector<Severity> out;
    for (const auto& v : votes) out.push_back(v.labels[c]);
    return out;
  }
};

/// Groups votes by pair in order of first appearance.
inline std::vector<VoteGroup> group_votes(const std::vector<corpus::AnnotationVote>& votes) {
  std::vector<VoteGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& v : votes) {
    auto [it, inserted] = index.try_emplace(v.pair_id, groups.size());
    if (inserted) groups.push_back({v.pair_id, {}});
    groups[it->second].votes.push_back(v);
  }
  return groups;
}

/// Throws ValidationError naming every pair that does not have exactly three
/// votes.
inline void require_three_votes(const std::vector<VoteGroup>& groups) {
  std::vector<std::string> bad;
  for (const auto& g : groups) {
    if (g.votes.size() != 3) bad.push_back(g.pair_id + " (" + std::to_string(g.votes.size()) + " votes)");
  }
  if (bad.empty()) return;
  std::string msg = "pairs without exactly 3 votes:";
  for (const auto& b : bad) msg += " " + b;
  throw ValidationError(msg);
}

struct AggregatedLabel {
  std::string pair_id;
  PerCategory<Outcome> outcomes{};

  bool operator==(const AggregatedLabel&) const = default;
};

inline std::vector<AggregatedLabel> aggregate(const std::vector<VoteGroup>& groups) {
  require_three_votes(groups);
  std::vector<AggregatedLabel> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    AggregatedLabel a{g.pair_id, {}};
    for (auto c : kAllCategories) {
      const auto labels = g.labels(c);
      a.outcomes[c] = majority_label(labels);
    }
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Krippendorff's alpha, ordinal metric

struct AlphaResult {
  std::optional<double> alpha;  // empty when undefined
  std::string note;             // reason when undefined
};

/// Ordinal Krippendorff's alpha over units of integer ratings (ordinal
/// ranks). Units with fewer than two ratings are not pairable and are
/// skipped.
///
/// Coincidences: each ordered pair of ratings from distinct raters within a
/// unit of m ratings adds 1/(m−1) to o[c][k]. With marginals n_c and total n,
/// δ²(c,k) = (Σ_{g between c and k} n_g − (n_c + n_k)/2)² and
/// α = 1 − (n−1) Σ o δ² / Σ n_c n_k δ².
inline double krippendorff_alpha_ordinal(const std::vector<std::vector<int>>& units) {
  std::vector<int> values;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    values.insert(values.end(), u.begin(), u.end());
  }
  if (values.empty()) throw ContractError("alpha needs at least one unit with two or more ratings");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t k = values.size();
  auto index_of = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
  };

  std::vector<double> o(k * k, 0.0);
  for (const auto& u : units) {
    const std::size_t m = u.size();
    if (m < 2) continue;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) o[index_of(u[i]) * k + index_of(u[j])] += w;
      }
    }
  }
  std::vector<double> n_c(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) n_c[c] += o[c * k + d];
  }
  double n = 0;
  for (double v : n_c) n += v;

  auto delta2 = [&](std::size_t c, std::size_t d) {
    if (c == d) return 0.0;
    const auto lo = std::min(c, d), hi = std::max(c, d);
    double s = 0;
    for (std::size_t g = lo; g <= hi; ++g) s += n_c[g];
    s -= (n_c[c] + n_c[d]) / 2.0;
    return s * s;
  };

  double observed = 0, expected = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      const double dd = delta2(c, d);
      observed += o[c * k + d] * dd;
      expected += n_c[c] * n_c[d] * dd;
    }
  }
  expected /= (n - 1.0);
  if (expected == 0) throw DegenerateInputError("undefined: no variance");
  return 1.0 - observed / expected;
}

/// Alpha for one category, with undefined cases reported instead of thrown.
inline AlphaResult category_alpha(const std::vector<VoteGroup>& groups, Category c) {
  std::vector<std::vector<int>> units;
  for (const auto& g : groups) {
    std::vector<int> ranks;
    for (const auto& v : g.votes) ranks.push_back(ordinal_rank(v.labels[c]));
    units.push_back(std::move(ranks));
  }
  try {
    return {krippendorff_alpha_ordinal(units), {}};
  } catch (const DegenerateInputError& e) {
    return {std::nullopt, e.what()};
  } catch (const ContractError& e) {
    return {std::nullopt, e.what()};
  }
}

// ---------------------------------------------------------------------------
// Majority agreement rates

struct CategoryAgreement {
  std::size_t n_pairs = 0;
  std::size_t n_majority = 0;
  std::size_t n_nonzero_pairs = 0;     // pairs where ≥2 votes are nonzero
  std::size_t n_nonzero_majority = 0;  // ... of which have a defined majority
  AlphaResult alpha;

  std::optional<double> pct_majority() const {
    if (n_pairs == 0) return std::nullopt;
    return 100.0 * static_cast<double>(n_majority) / static_cast<double>(n_pairs);
  }
  std::optional<double> pct_majority_nonzero() const {
    if (n_nonzero_pairs == 0) return std::nullopt;
    return 100.0 * static_cast<double>(n_nonzero_majority) / static_cast<double>(n_nonzero_pairs);
  }
};

using AgreementReport = PerCategory<CategoryAgreement>;

inline CategoryAgreement agreement_report(const std::vector<VoteGroup>& groups, Category c) {
  require_three_votes(groups);
  CategoryAgreement r;
  for (const auto& g : groups) {
    const auto labels = g.labels(c);
    const bool defined = majority_label(labels).has_value();
    const auto nonzero = std::count_if(labels.begin(), labels.end(),
                                       [](Severity s) { return s != Severity::none; });
    ++r.n_pairs;
    if (defined) ++r.n_majority;
    if (nonzero >= 2) {
      ++r.n_nonzero_pairs;
      if (defined) ++r.n_nonzero_majority;
    }
  }
  r.alpha = category_alpha(groups, c);
  return r;
}

inline AgreementReport agreement_report(const std::vector<VoteGroup>& groups) {
  AgreementReport rep;
  for (auto c : kAllCategories) rep[c] = agreement_report(groups, c);
  return rep;
}

}  // namespace simpfact::stats
