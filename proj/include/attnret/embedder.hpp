#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace attnret {

struct EmbedderConfig {
  std::size_t dimension = 64;
  std::uint64_t seed = 0;
  std::size_t ngram_size = 3;

  void validate() const;
};

/// Lowercases ASCII letters, collapses whitespace runs to one space and
/// trims. Bytes >= 0x80 pass through untouched, so the result does not
/// depend on locale.
std::string normalize_text(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Character n-gram feature hashing with the sign trick. Each n-gram of the
/// normalized text is hashed (FNV-1a, then a splitmix64 finalizer keyed by
/// the seed); the low bits pick the bucket and the top bit the sign. Text
/// shorter than n contributes itself as a single gram. The result is
/// L2-normalized, or all zero for empty text.
std::vector<double> embed_text(const EmbedderConfig& cfg, std::string_view text);

/// Precomputed embeddings keyed by text, read from an `embeddings.jsonl`
/// sidecar (`{"embedding": [...], "key": str}` per line).
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::filesystem::path& path, std::size_t dimension);

  void insert(std::string key, std::vector<float> embedding);
  const std::vector<float>* find(const std::string& key) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::vector<float>> table_;
};

/// Embedding source used when graph records carry no `embedding` field:
/// the sidecar table wins over the hashing embedder.
struct EmbeddingSource {
  EmbedderConfig config;
  std::optional<EmbeddingTable> table;

  std::vector<float> lookup(const std::string& text) const;
};

}  // namespace attnret
