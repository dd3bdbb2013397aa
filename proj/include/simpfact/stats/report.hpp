#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "simpfact/corpus.hpp"
#include "simpfact/io.hpp"
#include "simpfact/stats/agreement.hpp"
#include "simpfact/stats/distribution.hpp"

namespace simpfact::stats {

using json = nlohmann::json;

inline constexpr std::array<const char*, 4> kLevelNames{"0", "1", "2", "-1"};

inline double round1(double v) { return std::round(v * 10.0) / 10.0; }

/// Rounds shares to one decimal with the largest-remainder method, so a row
/// always sums to exactly 100.0.
inline std::array<double, 4> round_shares(const std::array<std::size_t, 4>& counts, std::size_t total) {
  std::array<double, 4> out{};
  if (total == 0) return out;
  std::array<long long, 4> tenths{};
  std::array<double, 4> remainder{};
  long long assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = 1000.0 * static_cast<double>(counts[i]) / static_cast<double>(total);
    tenths[i] = static_cast<long long>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(tenths[i]);
    assigned += tenths[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < 1000 && k < 4; ++k, ++assigned) ++tenths[order[k]];
  for (std::size_t i = 0; i < 4; ++i) out[i] = static_cast<double>(tenths[i]) / 10.0;
  return out;
}

inline json outcome_to_json(const Outcome& o) { return o ? json(to_int(*o)) : json(nullptr); }

inline json to_json(const AggregatedLabel& a) {
  json j;
  j["pair_id"] = a.pair_id;
  for (auto c : kAllCategories) j[std::string(to_string(c))] = outcome_to_json(a.outcomes[c]);
  return j;
}

inline AggregatedLabel aggregated_from_json(const json& j) {
  AggregatedLabel a;
  a.pair_id = corpus::detail::require_string(j, "pair_id");
  for (auto c : kAllCategories) {
    const auto& v = corpus::detail::require(j, std::string(to_string(c)).c_str());
    if (v.is_null()) continue;
    if (!v.is_number_integer()) throw ValidationError("label must be an integer or null");
    a.outcomes[c] = severity_from_int(v.get<long long>());
  }
  return a;
}

inline std::vector<AggregatedLabel> load_aggregated(const std::filesystem::path& path) {
  std::vector<AggregatedLabel> out;
  io::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(aggregated_from_json(j)); });
  return out;
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const CategoryAgreement& r) {
  json j;
  j["n_pairs"] = r.n_pairs;
  j["n_majority"] = r.n_majority;
  j["pct_majority"] = r.pct_majority() ? json(round1(*r.pct_majority())) : json(nullptr);
  j["n_nonzero_pairs"] = r.n_nonzero_pairs;
  j["n_nonzero_majority"] = r.n_nonzero_majority;
  j["pct_majority_nonzero"] =
      r.pct_majority_nonzero() ? json(round1(*r.pct_majority_nonzero())) : json(nullptr);
  j["kripp_alpha"] = opt_json(r.alpha.alpha);
  j["kripp_alpha_note"] = r.alpha.note.empty() ? json(nullptr) : json(r.alpha.note);
  return j;
}

inline json to_json(const DistributionReport& d) {
  json j;
  const auto shares = round_shares(d.counts, d.n_defined);
  json pct = json::object(), counts = json::object();
  for (std::size_t i = 0; i < 4; ++i) {
    pct[kLevelNames[i]] = d.n_defined ? json(shares[i]) : json(nullptr);
    counts[kLevelNames[i]] = d.counts[i];
  }
  j["percent"] = pct;
  j["counts"] = counts;
  j["n_defined"] = d.n_defined;
  j["n_undefined"] = d.n_undefined;
  return j;
}

inline std::string cell(const json& v) { return v.is_null() ? "NA" : v.dump(); }

/// Everything an aggregation run produces, already serialized. The annotation
/// service and the offline `agree` command both emit exactly these bytes.
struct ExportBundle {
  std::vector<AggregatedLabel> aggregated;
  AgreementReport agreement;
  PerCategory<DistributionReport> distribution;

  std::string aggregated_jsonl() const {
    return io::to_jsonl(aggregated, [](const AggregatedLabel& a) { return to_json(a); });
  }

  json report_json() const {
    json j;
    j["n_pairs"] = aggregated.size();
    json agr = json::object(), dist = json::object();
    for (auto c : kAllCategories) {
      agr[std::string(to_string(c))] = to_json(agreement[c]);
      dist[std::string(to_string(c))] = to_json(distribution[c]);
    }
    j["agreement"] = agr;
    j["distribution"] = dist;
    return j;
  }

  std::string report_text() const { return report_json().dump(2) + "\n"; }

  /// Majority-agreement table: one row per category.
  std::string agreement_tsv() const {
    const auto doc = report_json();
    std::string out = "category\tpct_majority\tpct_majority_nonzero\tkripp_alpha\tn_pairs\tn_nonzero_pairs\n";
    for (auto c : kAllCategories) {
      const auto& r = doc["agreement"][std::string(to_string(c))];
      out += std::string(to_string(c)) + "\t" + cell(r["pct_majority"]) + "\t" +
             cell(r["pct_majority_nonzero"]) + "\t" + cell(r["kripp_alpha"]) + "\t" + cell(r["n_pairs"]) +
             "\t" + cell(r["n_nonzero_pairs"]) + "\n";
    }
    return out;
  }

  /// Label-distribution table: one row per category, columns 0, 1, 2, −1.
  std::string distribution_tsv() const {
    const auto doc = report_json();
    std::string out = "category\t0\t1\t2\t-1\tn_defined\tn_undefined\n";
    for (auto c : kAllCategories) {
      const auto& r = doc["distribution"][std::string(to_string(c))];
      out += std::string(to_string(c));
      for (auto* level : kLevelNames) out += "\t" + cell(r["percent"][level]);
      out += "\t" + cell(r["n_defined"]) + "\t" + cell(r["n_undefined"]) + "\n";
    }
    return out;
  }
};

inline ExportBundle build_export(const std::vector<corpus::AnnotationVote>& votes) {
  const auto groups = group_votes(votes);
  ExportBundle b;
  b.aggregated = aggregate(groups);
  b.agreement = agreement_report(groups);
  for (auto c : kAllCategories) {
    std::vector<Outcome> outcomes;
    for (const auto& a : b.aggregated) outcomes.push_back(a.outcomes[c]);
    b.distribution[c] = distribution_report(outcomes);
  }
  return b;
}

/// Writes the aggregation artifacts shared by the service export and the
/// offline `agree` command: aggregated.jsonl, report.json, agreement.tsv and
/// distribution.tsv.
inline void write_export_files(const std::filesystem::path& dir, const ExportBundle& b) {
  io::write_file(dir / "aggregated.jsonl", b.aggregated_jsonl());
  io::write_file(dir / "report.json", b.report_text());
  io::write_file(dir / "agreement.tsv", b.agreement_tsv());
  io::write_file(dir / "distribution.tsv", b.distribution_tsv());
}

}  // namespace simpfact::stats
