#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "simpfact/corpus.hpp"
#include "simpfact/error.hpp"
#include "simpfact/types.hpp"

namespace simpfact::service {

using json = nlohmann::json;

/// Rejected request. `code` is a stable machine-readable identifier and
/// `status` the HTTP status the server answers with.
class ServiceError : public Error {
 public:
  ServiceError(std::string code, int status, const std::string& message)
      : Error(message), code_(std::move(code)), status_(status) {}
  const std::string& code() const noexcept { return code_; }
  int status() const noexcept { return status_; }

 private:
  std::string code_;
  int status_;
};

inline constexpr double kQualificationThreshold = 0.75;
inline constexpr std::size_t kVotesPerPair = 3;

enum class EventKind { register_annotator, qualification_answer, assignment, vote, export_results };

inline std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::register_annotator:
      return "register";
    case EventKind::qualification_answer:
      return "qualification_answer";
    case EventKind::assignment:
      return "assignment";
    case EventKind::vote:
      return "vote";
    case EventKind::export_results:
      return "export";
  }
  return "?";
}

inline EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::register_annotator, EventKind::qualification_answer, EventKind::assignment,
                 EventKind::vote, EventKind::export_results}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

struct EventRecord {
  std::uint64_t seq = 0;  // 1-based, strictly increasing
  std::int64_t ts = 0;    // seconds, UTC
  EventKind kind = EventKind::register_annotator;
  json payload = json::object();

  bool operator==(const EventRecord&) const = default;
};

inline json to_json(const EventRecord& e) {
  return {{"seq", e.seq}, {"ts", e.ts}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

inline EventRecord event_from_json(const json& j) {
  try {
    return {j.at("seq").get<std::uint64_t>(), j.at("ts").get<std::int64_t>(),
            event_kind_from_string(j.at("kind").get<std::string>()), j.at("payload")};
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed event: ") + e.what());
  }
}

struct AnnotatorProfile {
  std::string id;
  bool answered = false;  // qualification answers received
  bool qualified = false;
  double qualification_score = 0;
  std::size_t n_correct = 0;
  json answers = json::array();
  std::vector<std::string> completed;  // pair ids, in vote order
  std::optional<std::string> pending;  // assigned but not yet voted

  bool operator==(const AnnotatorProfile&) const = default;
};

struct PairProgress {
  std::vector<std::string> assigned;  // distinct annotator ids, at most 3
  std::vector<corpus::AnnotationVote> votes;

  bool complete() const { return votes.size() == kVotesPerPair; }
};

/// Service state as a deterministic fold of the event log. `apply` trusts
/// its input; validation happens before an event is written.
struct State {
  std::vector<std::string> pool;  // pair ids in pool order
  std::map<std::string, PairProgress> pairs;
  std::map<std::string, AnnotatorProfile> annotators;
  std::uint64_t last_seq = 0;
  std::size_t n_exports = 0;

  explicit State(const std::vector<std::string>& pool_ids = {}) : pool(pool_ids) {
    for (const auto& id : pool) pairs[id];
  }

  void apply(const EventRecord& e) {
    if (e.seq != last_seq + 1) {
      throw ValidationError("event sequence gap: expected " + std::to_string(last_seq + 1) + ", got " +
                            std::to_string(e.seq));
    }
    const auto& p = e.payload;
    switch (e.kind) {
      case EventKind::register_annotator: {
        const auto id = p.at("annotator_id").get<std::string>();
        annotators[id].id = id;
        break;
      }
      case EventKind::qualification_answer: {
        auto& a = annotators.at(p.at("annotator_id").get<std::string>());
        a.answered = true;
        a.answers = p.at("answers");
        a.n_correct = p.at("n_correct").get<std::size_t>();
        a.qualification_score = p.at("score").get<double>();
        a.qualified = p.at("qualified").get<bool>();
        break;
      }
      case EventKind::assignment: {
        const auto aid = p.at("annotator_id").get<std::string>();
        const auto pid = p.at("pair_id").get<std::string>();
        pairs.at(pid).assigned.push_back(aid);
        annotators.at(aid).pending = pid;
        break;
      }
      case EventKind::vote: {
        const auto v = corpus::vote_from_json(p);
        auto& a = annotators.at(v.annotator_id);
        a.pending.reset();
        a.completed.push_back(v.pair_id);
        pairs.at(v.pair_id).votes.push_back(v);
        break;
      }
      case EventKind::export_results:
        ++n_exports;
        break;
    }
    last_seq = e.seq;
  }

  /// Votes of complete pairs, in pool order, each pair's votes in log order.
  std::vector<corpus::AnnotationVote> complete_votes() const {
    std::vector<corpus::AnnotationVote> out;
    for (const auto& id : pool) {
      const auto& pp = pairs.at(id);
      if (pp.complete()) out.insert(out.end(), pp.votes.begin(), pp.votes.end());
    }
    return out;
  }

  json to_json() const {
    json ann = json::object();
    for (const auto& [id, a] : annotators) {
      ann[id] = {{"answered", a.answered},   {"qualified", a.qualified},
                 {"score", a.qualification_score}, {"n_correct", a.n_correct},
                 {"answers", a.answers},     {"completed", a.completed},
                 {"pending", a.pending ? json(*a.pending) : json(nullptr)}};
    }
    json prs = json::object();
    for (const auto& [id, pp] : pairs) {
      json votes = json::array();
      for (const auto& v : pp.votes) votes.push_back(corpus::to_json(v));
      prs[id] = {{"assigned", pp.assigned}, {"votes", votes}};
    }
    return {{"pool", pool}, {"pairs", prs}, {"annotators", ann}, {"last_seq", last_seq}, {"n_exports", n_exports}};
  }

  static State from_json(const json& j) {
    try {
      State s(j.at("pool").get<std::vector<std::string>>());
      for (const auto& [id, pj] : j.at("pairs").items()) {
        auto& pp = s.pairs.at(id);
        pp.assigned = pj.at("assigned").get<std::vector<std::string>>();
        for (const auto& v : pj.at("votes")) pp.votes.push_back(corpus::vote_from_json(v));
      }
      for (const auto& [id, aj] : j.at("annotators").items()) {
        auto& a = s.annotators[id];
        a.id = id;
        a.answered = aj.at("answered").get<bool>();
        a.qualified = aj.at("qualified").get<bool>();
        a.qualification_score = aj.at("score").get<double>();
        a.n_correct = aj.at("n_correct").get<std::size_t>();
        a.answers = aj.at("answers");
        a.completed = aj.at("completed").get<std::vector<std::string>>();
        if (!aj.at("pending").is_null()) a.pending = aj.at("pending").get<std::string>();
      }
      s.last_seq = j.at("last_seq").get<std::uint64_t>();
      s.n_exports = j.at("n_exports").get<std::size_t>();
      return s;
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed snapshot: ") + e.what());
    } catch (const std::out_of_range&) {
      throw ValidationError("snapshot refers to a pair outside the pool");
    }
  }
};

}  // namespace simpfact::service
