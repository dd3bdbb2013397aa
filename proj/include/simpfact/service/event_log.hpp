#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "simpfact/io.hpp"
#include "simpfact/service/state.hpp"

namespace simpfact::service {

/// Append-only JSON-lines event log plus an optional state snapshot, both in
/// one directory. Each append is flushed before it returns. An unterminated
/// final line is a torn write from a crash: it is dropped and cut from the
/// file on open.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create data directory " + dir_.string() + ": " + ec.message());
  }
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  ~EventLog() {
    if (out_) std::fclose(out_);
  }

  std::filesystem::path log_path() const { return dir_ / "events.jsonl"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }

  /// All complete events, in order.
  std::vector<EventRecord> read_all() {
    std::vector<EventRecord> events;
    if (!std::filesystem::exists(log_path())) return events;
    const auto data = io::read_file(log_path());
    std::size_t pos = 0, line = 0;
    while (pos < data.size()) {
      const auto nl = data.find('\n', pos);
      if (nl == std::string::npos) {
        std::filesystem::resize_file(log_path(), pos);
        break;
      }
      ++line;
      try {
        events.push_back(event_from_json(json::parse(data.substr(pos, nl - pos))));
      } catch (const std::exception& e) {
        throw ValidationError(log_path().string() + ":" + std::to_string(line) + ": corrupt event: " + e.what());
      }
      pos = nl + 1;
    }
    return events;
  }

  void append(const EventRecord& e) {
    if (!out_) {
      out_ = std::fopen(log_path().c_str(), "ab");
      if (!out_) throw IoError("cannot open " + log_path().string() + " for appending");
    }
    const auto line = to_json(e).dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), out_) != line.size() || std::fflush(out_) != 0) {
      throw IoError("write to " + log_path().string() + " failed");
    }
  }

  std::optional<State> load_snapshot() const {
    if (!std::filesystem::exists(snapshot_path())) return std::nullopt;
    try {
      return State::from_json(json::parse(io::read_file(snapshot_path())));
    } catch (const std::exception&) {
      return std::nullopt;  // a damaged snapshot is only a cache; replay the log instead
    }
  }

  /// Written to a temporary file and renamed, so readers see old or new.
  void write_snapshot(const State& s) const {
    const auto tmp = dir_ / "snapshot.json.tmp";
    io::write_file(tmp, s.to_json().dump());
    std::error_code ec;
    std::filesystem::rename(tmp, snapshot_path(), ec);
    if (ec) throw IoError("cannot install snapshot: " + ec.message());
  }

 private:
  std::filesystem::path dir_;
  std::FILE* out_ = nullptr;
};

}  // namespace simpfact::service
