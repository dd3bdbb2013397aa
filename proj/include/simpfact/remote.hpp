#pragma once

#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "simpfact/embedding.hpp"
#include "simpfact/perturb/masked_lm.hpp"

namespace simpfact::remote {

using json = nlohmann::json;

/// Plain-HTTP endpoint split into the part httplib connects to and the
/// request path.
struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'

  static Endpoint parse(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
      throw ContractError("endpoint '" + url + "' must be an http:// URL");
    }
    const auto slash = url.find('/', scheme + 3);
    if (slash == scheme + 3) throw ContractError("endpoint '" + url + "' has no host");
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
  }
};

struct ClientOptions {
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{30000};
  std::size_t max_parallelism = 4;
};

/// Explicit value if given, else the environment variable, else nullopt.
inline std::optional<std::string> endpoint_from(const std::optional<std::string>& flag, const char* env_var) {
  if (flag && !flag->empty()) return flag;
  if (const char* v = std::getenv(env_var); v && *v) return std::string(v);
  return std::nullopt;
}

namespace detail {

/// POSTs `body` and returns the parsed JSON reply. Every failure becomes a
/// ProviderError naming the provider.
inline json post_json(const std::string& provider, const Endpoint& ep, const ClientOptions& opts, const json& body) {
  httplib::Client cli(ep.origin);
  cli.set_connection_timeout(opts.connect_timeout);
  cli.set_read_timeout(opts.read_timeout);
  auto res = cli.Post(ep.path, body.dump(), "application/json");
  if (!res) throw ProviderError(provider, "request to " + ep.origin + ep.path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderError(provider, "HTTP " + std::to_string(res->status) + " from " + ep.origin + ep.path);
  auto j = json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProviderError(provider, "reply is not a JSON object");
  return j;
}

}  // namespace detail

/// Embedding service client: {"texts": [...]} -> {"vectors": [[...], ...]}.
/// Replies are cached per text, so repeated sources cost one request. The
/// dimension is fixed by the first reply unless given up front.
class RemoteEmbeddingProvider final : public metrics::EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(const std::string& url, std::string name = {}, std::size_t dimension = 0,
                                   ClientOptions opts = {})
      : endpoint_(Endpoint::parse(url)),
        name_(name.empty() ? "remote:" + url : std::move(name)),
        opts_(opts),
        dim_(dimension) {}

  std::string name() const override { return name_; }
  std::size_t max_parallelism() const override { return opts_.max_parallelism; }

  std::size_t dimension() const override {
    {
      std::lock_guard lock(mu_);
      if (dim_) return dim_;
    }
    embed(" ");
    std::lock_guard lock(mu_);
    return dim_;
  }

  std::vector<double> embed(std::string_view text) const override {
    const std::string key(text);
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    return embed_batch({key}).front();
  }

  /// One request for all `texts`, in order.
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const {
    const auto reply = detail::post_json(name_, endpoint_, opts_, {{"texts", texts}});
    const auto it = reply.find("vectors");
    if (it == reply.end() || !it->is_array() || it->size() != texts.size()) {
      throw ProviderError(name_, "reply must hold one vector per text");
    }
    std::vector<std::vector<double>> out;
    try {
      out = it->get<std::vector<std::vector<double>>>();
    } catch (const json::exception&) {
      throw ProviderError(name_, "vectors must be arrays of numbers");
    }
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].empty()) throw ProviderError(name_, "empty vector");
      if (!dim_) dim_ = out[i].size();
      if (out[i].size() != dim_) {
        throw ProviderError(name_, "vector length " + std::to_string(out[i].size()) + " differs from " +
                                       std::to_string(dim_));
      }
      cache_.emplace(texts[i], out[i]);
    }
    return out;
  }

 private:
  Endpoint endpoint_;
  std::string name_;
  ClientOptions opts_;
  mutable std::mutex mu_;
  mutable std::size_t dim_;
  mutable std::map<std::string, std::vector<double>> cache_;
};

/// Masked-LM service client:
/// {"text", "mask_positions", "rank"} -> {"tokens": [...]}.
class RemoteMaskedLM final : public perturb::MaskedLanguageModel {
 public:
  explicit RemoteMaskedLM(const std::string& url, std::string name = {}, ClientOptions opts = {})
      : endpoint_(Endpoint::parse(url)), name_(name.empty() ? "remote:" + url : std::move(name)), opts_(opts) {}

  std::string name() const override { return name_; }
  std::size_t max_parallelism() const override { return opts_.max_parallelism; }

  std::vector<std::string> fill(std::string_view masked_text, std::span<const std::size_t> positions,
                                int rank) const override {
    if (rank < 1) throw ContractError("mask-fill rank must be at least 1");
    const json body{{"text", masked_text},
                    {"mask_positions", std::vector<std::size_t>(positions.begin(), positions.end())},
                    {"rank", rank}};
    const auto reply = detail::post_json(name_, endpoint_, opts_, body);
    const auto it = reply.find("tokens");
    if (it == reply.end() || !it->is_array()) throw ProviderError(name_, "reply has no tokens array");
    try {
      return it->get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw ProviderError(name_, "tokens must be strings");
    }
  }

 private:
  Endpoint endpoint_;
  std::string name_;
  ClientOptions opts_;
};

}  // namespace simpfact::remote
