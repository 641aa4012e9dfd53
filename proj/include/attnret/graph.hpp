#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace attnret {

/// Thrown for malformed or inconsistent input data. Messages carry the
/// offending file and 1-based line number when one exists.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NodeId = std::size_t;
using EdgeIndex = std::size_t;

struct NodeRecord {
  std::int64_t id = 0;
  std::string text;
  std::vector<float> embedding;
};

struct EdgeRecord {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  std::string text;
  std::vector<float> embedding;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
};

/// Immutable textual graph. Node ids are dense (0..n-1) in file order; the
/// ids found on disk are kept in `original_id`. Embeddings are stored as
/// float rows; all score arithmetic happens in double.
class TextualGraph {
 public:
  TextualGraph() = default;

  /// Validates and renumbers. Throws DataError on duplicate ids, dangling
  /// endpoints, dimension mismatch or non-finite components.
  static TextualGraph from_records(std::size_t dimension, bool directed,
                                   std::vector<NodeRecord> nodes,
                                   std::vector<EdgeRecord> edges);

  std::size_t dimension() const { return dimension_; }
  bool directed() const { return directed_; }
  std::size_t num_nodes() const { return node_text_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::string& node_text(NodeId v) const { return node_text_.at(v); }
  const std::string& edge_text(EdgeIndex e) const { return edge_text_.at(e); }
  const Edge& edge(EdgeIndex e) const { return edges_.at(e); }
  std::span<const Edge> edges() const { return edges_; }
  std::int64_t original_id(NodeId v) const { return original_ids_.at(v); }
  std::optional<NodeId> find_original(std::int64_t original) const;

  std::span<const float> node_embedding(NodeId v) const {
    return {node_features_.data() + v * dimension_, dimension_};
  }
  std::span<const float> edge_embedding(EdgeIndex e) const {
    return {edge_features_.data() + e * dimension_, dimension_};
  }
  /// Row-major |V| x d and |E| x d feature blocks.
  std::span<const float> node_features() const { return node_features_; }
  std::span<const float> edge_features() const { return edge_features_; }

  /// FNV-1a fingerprint over structure, texts and embedding bits, as 16 hex
  /// digits. Used as the parent identity in subgraph files.
  const std::string& identity() const { return identity_; }

  bool operator==(const TextualGraph& other) const;

 private:
  std::size_t dimension_ = 0;
  bool directed_ = true;
  std::vector<std::int64_t> original_ids_;
  std::vector<std::int64_t> sorted_original_;  // sorted original ids
  std::vector<NodeId> sorted_dense_;           // dense id for sorted_original_[i]
  std::vector<std::string> node_text_;
  std::vector<float> node_features_;
  std::vector<Edge> edges_;
  std::vector<std::string> edge_text_;
  std::vector<float> edge_features_;
  std::string identity_;
};

/// S* = (V*, E*). Both vectors are sorted ascending without duplicates.
struct Subgraph {
  std::string graph;
  std::vector<NodeId> nodes;
  std::vector<EdgeIndex> edges;

  bool operator==(const Subgraph&) const = default;
};

struct Query {
  std::string id;
  std::string text;
  std::vector<double> embedding;
  std::optional<std::vector<NodeId>> gold_nodes;  // dense ids, sorted
};

/// Edge indices whose endpoints both lie in `nodes`, ascending. Incidence
/// ignores direction. Throws std::out_of_range on an unknown node id.
std::vector<EdgeIndex> induced_edges(const TextualGraph& graph,
                                     std::span<const NodeId> nodes);

/// True when every edge of `sub` has both endpoints in its node set and all
/// ids are in range for `graph`.
bool is_closed(const TextualGraph& graph, const Subgraph& sub);

}  // namespace attnret
