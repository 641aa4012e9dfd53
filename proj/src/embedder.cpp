#include "attnret/embedder.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "attnret/graph.hpp"
#include "json_util.hpp"

namespace attnret {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

void EmbedderConfig::validate() const {
  if (dimension == 0) throw std::invalid_argument("embedder dimension must be positive");
  if (ngram_size == 0) throw std::invalid_argument("embedder ngram_size must be at least 1");
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> embed_text(const EmbedderConfig& cfg, std::string_view text) {
  cfg.validate();
  std::vector<double> out(cfg.dimension, 0.0);
  const std::string norm = normalize_text(text);
  if (norm.empty()) return out;

  const std::uint64_t key = splitmix64(cfg.seed);
  auto add = [&](std::string_view gram) {
    const std::uint64_t h = splitmix64(fnv1a64(gram) ^ key);
    out[h % cfg.dimension] += (h >> 63) ? -1.0 : 1.0;
  };
  const std::size_t n = cfg.ngram_size;
  if (norm.size() < n) {
    add(norm);
  } else {
    for (std::size_t i = 0; i + n <= norm.size(); ++i) add(std::string_view(norm).substr(i, n));
  }

  double sq = 0.0;
  for (double v : out) sq += v * v;
  if (sq == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : out) v *= inv;
  return out;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::size_t dimension) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    auto obj = detail::parse_object(line, where);
    auto key = detail::require_string(obj, "key", where);
    auto emb = detail::require_embedding(obj, "embedding", dimension, where);
    table.insert(std::move(key), std::move(emb));
  }
  return table;
}

void EmbeddingTable::insert(std::string key, std::vector<float> embedding) {
  table_.insert_or_assign(std::move(key), std::move(embedding));
}

const std::vector<float>* EmbeddingTable::find(const std::string& key) const {
  auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<float> EmbeddingSource::lookup(const std::string& text) const {
  if (table) {
    if (const auto* hit = table->find(text)) return *hit;
  }
  const auto v = embed_text(config, text);
  return {v.begin(), v.end()};
}

}  // namespace attnret
