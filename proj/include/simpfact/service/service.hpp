#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "simpfact/corpus.hpp"
#include "simpfact/service/event_log.hpp"
#include "simpfact/service/state.hpp"
#include "simpfact/stats/report.hpp"

namespace simpfact::service {

// ---------------------------------------------------------------------------
// Qualification

inline constexpr std::size_t kGoldSize = 10;

struct GoldItem {
  corpus::SentencePair pair;
  PerCategory<Severity> labels;
};

/// Qualification screen: `kGoldSize` pairs with agreed labels per category.
struct GoldSet {
  std::vector<GoldItem> items;

  static GoldSet from_json(const json& j) {
    const auto& arr = j.is_object() ? corpus::detail::require(j, "pairs") : j;
    if (!arr.is_array()) throw ValidationError("gold set must be an array of pairs");
    GoldSet g;
    for (const auto& item : arr) {
      GoldItem gi;
      json pair = item;
      const auto& labels = corpus::detail::require(item, "labels");
      pair.erase("labels");
      gi.pair = corpus::pair_from_json(pair);
      for (auto c : kAllCategories) gi.labels[c] = corpus::detail::require_severity(labels, std::string(to_string(c)).c_str());
      g.items.push_back(std::move(gi));
    }
    if (g.items.size() != kGoldSize) {
      throw ValidationError("gold set must have " + std::to_string(kGoldSize) + " pairs, found " +
                            std::to_string(g.items.size()));
    }
    std::set<std::string> ids;
    for (const auto& i : g.items) {
      if (!ids.insert(i.pair.id).second) throw ValidationError("duplicate gold pair id '" + i.pair.id + "'");
    }
    return g;
  }

  static GoldSet load(const std::filesystem::path& path) {
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    try {
      return from_json(j);
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }

  const GoldItem* find(std::string_view id) const {
    for (const auto& i : items) {
      if (i.pair.id == id) return &i;
    }
    return nullptr;
  }
};

struct QualificationAnswer {
  std::string pair_id;
  PerCategory<Severity> labels;
};

struct QualificationOutcome {
  std::string annotator_id;
  bool answered = false;
  bool qualified = false;
  double score = 0;
  std::size_t n_correct = 0;

  json to_json() const {
    return {{"annotator_id", annotator_id},
            {"answered", answered},
            {"qualified", qualified},
            {"qualification_score", score},
            {"n_correct", n_correct},
            {"n_judgments", 3 * kGoldSize}};
  }
};

inline json answers_to_json(const std::vector<QualificationAnswer>& answers) {
  json out = json::array();
  for (const auto& a : answers) {
    json j{{"pair_id", a.pair_id}};
    for (auto c : kAllCategories) j[std::string(to_string(c))] = to_int(a.labels[c]);
    out.push_back(j);
  }
  return out;
}

inline std::vector<QualificationAnswer> answers_from_json(const json& j) {
  if (!j.is_array()) throw ContractError("answers must be an array");
  std::vector<QualificationAnswer> out;
  for (const auto& a : j) {
    QualificationAnswer qa;
    qa.pair_id = corpus::detail::require_string(a, "pair_id");
    for (auto c : kAllCategories) qa.labels[c] = corpus::detail::require_severity(a, std::string(to_string(c)).c_str());
    out.push_back(std::move(qa));
  }
  return out;
}

/// Category-level exact matches over all gold judgments. Requires one answer
/// per gold pair.
inline std::size_t score_answers(const GoldSet& gold, const std::vector<QualificationAnswer>& answers) {
  if (answers.size() != gold.items.size()) {
    throw ContractError("expected " + std::to_string(gold.items.size()) + " qualification answers, got " +
                        std::to_string(answers.size()));
  }
  std::set<std::string> seen;
  std::size_t correct = 0;
  for (const auto& a : answers) {
    const auto* g = gold.find(a.pair_id);
    if (!g) throw ContractError("answer for unknown gold pair '" + a.pair_id + "'");
    if (!seen.insert(a.pair_id).second) throw ContractError("two answers for gold pair '" + a.pair_id + "'");
    for (auto c : kAllCategories) correct += a.labels[c] == g->labels[c];
  }
  return correct;
}

// ---------------------------------------------------------------------------

struct ServiceOptions {
  std::size_t snapshot_every = 100;  // events between snapshots; 0 disables
  std::function<std::int64_t()> clock = [] {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
  /// Called under the service lock after each event is logged and applied.
  std::function<void(const EventRecord&, const State&)> on_commit;
};

struct ExportResult {
  stats::ExportBundle bundle;
  std::vector<corpus::AnnotationVote> votes;
  std::filesystem::path dir;

  json to_json() const {
    json agg = json::array();
    for (const auto& a : bundle.aggregated) agg.push_back(stats::to_json(a));
    return {{"n_complete_pairs", bundle.aggregated.size()}, {"aggregated", agg}, {"report", bundle.report_json()}};
  }
};

/// Annotation backend. Every mutation is validated, appended to the event
/// log and then folded into the in-memory state, all under one lock, so the
/// log order is the order of effect. Construction replays the log.
class AnnotationService {
 public:
  AnnotationService(std::filesystem::path data_dir, std::vector<corpus::SentencePair> pool, GoldSet gold,
                    ServiceOptions opts = {})
      : dir_(std::move(data_dir)), log_(dir_), pool_(std::move(pool)), gold_(std::move(gold)), opts_(std::move(opts)) {
    corpus::check_unique_ids(pool_);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      ids.push_back(pool_[i].id);
      index_[pool_[i].id] = i;
    }
    state_ = State(ids);
    const auto events = log_.read_all();
    if (auto snap = log_.load_snapshot(); snap && snap->pool == ids && snap->last_seq <= events.size() &&
                                          (snap->last_seq == 0 || events[snap->last_seq - 1].seq == snap->last_seq)) {
      state_ = std::move(*snap);
    }
    try {
      for (const auto& e : events) {
        if (e.seq > state_.last_seq) state_.apply(e);
      }
    } catch (const std::out_of_range&) {
      throw ValidationError(log_.log_path().string() + ": event refers to a pair or annotator not in this pool");
    } catch (const json::exception& e) {
      throw ValidationError(log_.log_path().string() + ": malformed event payload: " + e.what());
    }
  }

  QualificationOutcome register_and_qualify(const std::string& id,
                                            const std::optional<std::vector<QualificationAnswer>>& answers) {
    if (id.empty()) throw ServiceError("invalid_annotator", 400, "annotator id must be non-empty");
    std::lock_guard lock(mu_);
    auto it = state_.annotators.find(id);
    if (it == state_.annotators.end()) {
      commit(EventKind::register_annotator, {{"annotator_id", id}});
      it = state_.annotators.find(id);
    }
    if (answers && !it->second.answered) {
      const auto correct = score_answers(gold_, *answers);
      const double score = static_cast<double>(correct) / static_cast<double>(3 * gold_.items.size());
      commit(EventKind::qualification_answer, {{"annotator_id", id},
                                               {"answers", answers_to_json(*answers)},
                                               {"n_correct", correct},
                                               {"score", score},
                                               {"qualified", score >= kQualificationThreshold}});
    }
    return outcome(it->second);
  }

  /// The annotator's open assignment if any, else a new one: an incomplete
  /// pair they have not been given, with the most votes, earliest in the pool.
  std::optional<corpus::SentencePair> next_task(const std::string& id) {
    std::lock_guard lock(mu_);
    const auto& a = require_qualified(id);
    if (a.pending) return pool_[index_.at(*a.pending)];
    const std::string* best = nullptr;
    std::size_t best_votes = 0;
    for (const auto& pid : state_.pool) {
      const auto& pp = state_.pairs.at(pid);
      if (pp.assigned.size() >= kVotesPerPair) continue;
      if (std::find(pp.assigned.begin(), pp.assigned.end(), id) != pp.assigned.end()) continue;
      if (!best || pp.votes.size() > best_votes) {
        best = &pid;
        best_votes = pp.votes.size();
      }
    }
    if (!best) return std::nullopt;
    const auto pid = *best;
    commit(EventKind::assignment, {{"annotator_id", id}, {"pair_id", pid}});
    return pool_[index_.at(pid)];
  }

  /// Raw label values are validated here so that the error code can say
  /// which check failed.
  json submit_vote(const std::string& annotator, const std::string& pair_id, const std::array<json, 3>& labels) {
    std::lock_guard lock(mu_);
    const auto& a = require_qualified(annotator);
    if (!index_.count(pair_id)) throw ServiceError("unknown_pair", 404, "no pair '" + pair_id + "' in the pool");
    corpus::AnnotationVote v;
    v.pair_id = pair_id;
    v.annotator_id = annotator;
    for (auto c : kAllCategories) {
      const auto& l = labels[static_cast<std::size_t>(c)];
      if (!l.is_number_integer() || !is_valid_severity(l.get<long long>())) {
        throw ServiceError("invalid_label", 400,
                           std::string(to_string(c)) + " label must be one of 0, 1, 2, -1, got " + l.dump());
      }
      v.labels[c] = severity_from_int(static_cast<int>(l.get<long long>()));
    }
    if (std::find(a.completed.begin(), a.completed.end(), pair_id) != a.completed.end()) {
      throw ServiceError("duplicate_vote", 409, annotator + " already voted on " + pair_id);
    }
    if (a.pending != pair_id) throw ServiceError("unassigned", 409, pair_id + " is not assigned to " + annotator);
    v.submitted_at = opts_.clock();
    commit(EventKind::vote, corpus::to_json(v), v.submitted_at);
    const auto& pp = state_.pairs.at(pair_id);
    return {{"pair_id", pair_id}, {"n_votes", pp.votes.size()}, {"complete", pp.complete()}};
  }

  /// Aggregates complete pairs and writes votes.jsonl plus the shared export
  /// files under `<data-dir>/export`.
  ExportResult export_results() {
    std::lock_guard lock(mu_);
    ExportResult r;
    r.votes = state_.complete_votes();
    r.bundle = stats::build_export(r.votes);
    r.dir = dir_ / "export";
    io::write_file(r.dir / "votes.jsonl", corpus::votes_to_jsonl(r.votes));
    stats::write_export_files(r.dir, r.bundle);
    commit(EventKind::export_results, {{"n_complete_pairs", r.bundle.aggregated.size()},
                                       {"aggregated_digest", io::fnv1a_hex(r.bundle.aggregated_jsonl())}});
    return r;
  }

  json progress(const std::optional<std::string>& annotator = std::nullopt) const {
    std::lock_guard lock(mu_);
    std::size_t complete = 0, in_progress = 0, votes = 0, qualified = 0;
    for (const auto& [id, pp] : state_.pairs) {
      votes += pp.votes.size();
      if (pp.complete()) {
        ++complete;
      } else if (!pp.assigned.empty()) {
        ++in_progress;
      }
    }
    for (const auto& [id, a] : state_.annotators) qualified += a.qualified;
    json j{{"n_pairs", state_.pool.size()}, {"n_complete", complete},   {"n_in_progress", in_progress},
           {"n_votes", votes},              {"n_annotators", state_.annotators.size()}, {"n_qualified", qualified}};
    if (annotator) {
      auto it = state_.annotators.find(*annotator);
      if (it == state_.annotators.end()) throw ServiceError("unknown_annotator", 404, "no annotator '" + *annotator + "'");
      j["annotator"] = {{"annotator_id", *annotator},
                        {"qualified", it->second.qualified},
                        {"n_completed", it->second.completed.size()}};
    }
    return j;
  }

  /// Copy of the current state, consistent with some prefix of the log.
  State state() const {
    std::lock_guard lock(mu_);
    return state_;
  }

  const GoldSet& gold() const noexcept { return gold_; }
  const std::filesystem::path& data_dir() const noexcept { return dir_; }

 private:
  void commit(EventKind kind, json payload, std::optional<std::int64_t> ts = std::nullopt) {
    const EventRecord e{state_.last_seq + 1, ts ? *ts : opts_.clock(), kind, std::move(payload)};
    log_.append(e);
    state_.apply(e);
    if (opts_.snapshot_every && e.seq % opts_.snapshot_every == 0) log_.write_snapshot(state_);
    if (opts_.on_commit) opts_.on_commit(e, state_);
  }

  const AnnotatorProfile& require_qualified(const std::string& id) const {
    auto it = state_.annotators.find(id);
    if (it == state_.annotators.end()) throw ServiceError("unauthorized", 403, "unknown annotator '" + id + "'");
    if (!it->second.qualified) throw ServiceError("unauthorized", 403, "annotator '" + id + "' is not qualified");
    return it->second;
  }

  static QualificationOutcome outcome(const AnnotatorProfile& a) {
    return {a.id, a.answered, a.qualified, a.qualification_score, a.n_correct};
  }

  std::filesystem::path dir_;
  EventLog log_;
  std::vector<corpus::SentencePair> pool_;
  std::unordered_map<std::string, std::size_t> index_;
  GoldSet gold_;
  ServiceOptions opts_;
  State state_;
  mutable std::mutex mu_;
};

}  // namespace simpfact::service
