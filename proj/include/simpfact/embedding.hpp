#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simpfact/error.hpp"
#include "simpfact/io.hpp"
#include "simpfact/text.hpp"

namespace simpfact::metrics {

/// Contract for semantic-similarity backends. Vector providers implement
/// `embed`; scorers that are not a single-vector cosine (greedy token
/// matching, BERTScore-style) return false from `vector_based()` and
/// implement `pair_score`. Implementations must be deterministic.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  /// Length of every vector returned by `embed`; 0 for pair scorers.
  virtual std::size_t dimension() const = 0;
  virtual bool vector_based() const { return true; }
  /// Upper bound on concurrent calls this provider tolerates.
  virtual std::size_t max_parallelism() const { return 1; }

  virtual std::vector<double> embed(std::string_view /*text*/) const {
    throw ProviderError(name(), "provider does not produce embeddings");
  }
  virtual double pair_score(std::string_view /*a*/, std::string_view /*b*/) const {
    throw ProviderError(name(), "provider does not score pairs");
  }
};

struct Similarity {
  double score = 0;
  std::string provider;
};

inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("cosine of vectors with different lengths");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw DegenerateInputError("undefined similarity: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Cosine of the provider's embeddings, or its pair score for non-vector
/// providers. Failures other than a zero vector surface as ProviderError.
inline Similarity embed_similarity(std::string_view a, std::string_view b,
                                   const EmbeddingProvider& provider) {
  const auto name = provider.name();
  try {
    if (!provider.vector_based()) {
      const double s = provider.pair_score(a, b);
      if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
        throw ProviderError(name, "pair score " + std::to_string(s) + " outside [-1, 1]");
      }
      return {s, name};
    }
    const auto va = provider.embed(a);
    const auto vb = provider.embed(b);
    if (va.size() != provider.dimension() || vb.size() != provider.dimension()) {
      throw ProviderError(name, "embedding length differs from declared dimension " +
                                    std::to_string(provider.dimension()));
    }
    return {cosine(va, vb), name};
  } catch (const ProviderError&) {
    throw;
  } catch (const DegenerateInputError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(name, e.what());
  }
}

/// Deterministic bag-of-hashed-tokens embedding for tests and offline runs.
/// Each lowercased token adds ±1 to one bucket chosen by FNV-1a.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension = 64) : dimension_(dimension) {
    if (dimension == 0) throw ContractError("embedding dimension must be positive");
  }
  std::string name() const override { return "hash-stub"; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_parallelism() const override { return 64; }

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dimension_, 0.0);
    for (const auto& tok : token_strings(text)) {
      const auto h = io::fnv1a(tok);
      v[h % dimension_] += ((h >> 32) & 1) ? 1.0 : -1.0;
    }
    return v;
  }

 private:
  std::size_t dimension_;
};

/// Greedy exact-match token F1 over lowercased token multisets. Stands in
/// for token-alignment scorers like BERTScore when no service is running.
class TokenF1Provider final : public EmbeddingProvider {
 public:
  std::string name() const override { return "token-f1"; }
  std::size_t dimension() const override { return 0; }
  bool vector_based() const override { return false; }
  std::size_t max_parallelism() const override { return 64; }

  double pair_score(std::string_view a, std::string_view b) const override {
    const auto ta = token_strings(a);
    const auto tb = token_strings(b);
    if (ta.empty() || tb.empty()) return ta.empty() && tb.empty() ? 1.0 : 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : ta) ++counts[t];
    double matched = 0;
    for (const auto& t : tb) {
      if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
        --it->second;
        matched += 1;
      }
    }
    const double p = matched / static_cast<double>(tb.size());
    const double r = matched / static_cast<double>(ta.size());
    return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
  }
};

}  // namespace simpfact::metrics
