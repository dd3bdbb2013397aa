#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "simpfact/error.hpp"
#include "simpfact/text.hpp"

namespace simpfact::io {

using json = nlohmann::json;

/// Reads a whole file and rejects it if any byte sequence is not UTF-8.
inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  std::string data = std::move(buf).str();
  if (auto off = find_invalid_utf8(data); off != std::string::npos) {
    throw DecodeError(path.string(), off);
  }
  return data;
}

/// Splits on LF. A final line without a terminator is kept; the empty string
/// after a trailing LF is not a line.
inline std::vector<std::string> split_lines(std::string_view data) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < data.size()) {
    auto nl = data.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(data.substr(start));
      break;
    }
    lines.emplace_back(data.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  return split_lines(read_file(path));
}

/// Parses a JSON-lines file, calling `fn(record, line_number)` for each
/// non-blank line. Parse failures and ValidationErrors raised by `fn` are
/// rethrown with the file name and 1-based line number attached.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const json&, std::size_t)>& fn) {
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(i + 1);
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": malformed JSON: " + e.what());
    }
    try {
      fn(record, i + 1);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename Range, typename ToJson>
std::string to_jsonl(const Range& records, ToJson&& to_json) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

/// 64-bit FNV-1a. Used for config/data digests and stub hashing; not a
/// cryptographic hash.
inline std::uint64_t fnv1a(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fnv1a_hex(std::string_view data) {
  auto h = fnv1a(data);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace simpfact::io
