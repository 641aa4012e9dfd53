#include "attnret/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string_view>

#include "attnret/embedder.hpp"

namespace attnret {

namespace {

std::uint64_t hash_u64(std::uint64_t h, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return fnv1a64(std::string_view(bytes, 8), h);
}

std::uint64_t hash_text(std::uint64_t h, const std::string& s) {
  h = hash_u64(h, s.size());
  return fnv1a64(s, h);
}

std::uint64_t hash_floats(std::uint64_t h, std::span<const float> values) {
  for (float f : values) h = hash_u64(h, std::bit_cast<std::uint32_t>(f));
  return h;
}

void check_embedding(std::span<const float> embedding, std::size_t dimension,
                     const char* what, std::size_t index) {
  if (embedding.size() != dimension) {
    throw DataError(std::string(what) + " " + std::to_string(index) + ": embedding has " +
                    std::to_string(embedding.size()) + " components, expected " +
                    std::to_string(dimension));
  }
  for (float f : embedding) {
    if (!std::isfinite(f)) {
      throw DataError(std::string(what) + " " + std::to_string(index) +
                      ": embedding contains a non-finite value");
    }
  }
}

}  // namespace

TextualGraph TextualGraph::from_records(std::size_t dimension, bool directed,
                                        std::vector<NodeRecord> nodes,
                                        std::vector<EdgeRecord> edges) {
  if (dimension == 0) throw DataError("graph dimension must be positive");

  TextualGraph g;
  g.dimension_ = dimension;
  g.directed_ = directed;
  g.original_ids_.reserve(nodes.size());
  g.node_text_.reserve(nodes.size());
  g.node_features_.reserve(nodes.size() * dimension);

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    check_embedding(nodes[i].embedding, dimension, "node record", i);
    g.original_ids_.push_back(nodes[i].id);
    g.node_text_.push_back(std::move(nodes[i].text));
    g.node_features_.insert(g.node_features_.end(), nodes[i].embedding.begin(),
                            nodes[i].embedding.end());
  }

  std::vector<NodeId> order(nodes.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(),
            [&](NodeId a, NodeId b) { return g.original_ids_[a] < g.original_ids_[b]; });
  g.sorted_original_.reserve(order.size());
  g.sorted_dense_ = order;
  for (NodeId v : order) g.sorted_original_.push_back(g.original_ids_[v]);
  auto dup = std::adjacent_find(g.sorted_original_.begin(), g.sorted_original_.end());
  if (dup != g.sorted_original_.end()) {
    throw DataError("duplicate node id " + std::to_string(*dup));
  }

  g.edges_.reserve(edges.size());
  g.edge_text_.reserve(edges.size());
  g.edge_features_.reserve(edges.size() * dimension);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto src = g.find_original(edges[e].src);
    auto dst = g.find_original(edges[e].dst);
    if (!src || !dst) {
      throw DataError("edge record " + std::to_string(e) + ": endpoint " +
                      std::to_string(!src ? edges[e].src : edges[e].dst) +
                      " is not a node id");
    }
    check_embedding(edges[e].embedding, dimension, "edge record", e);
    g.edges_.push_back({*src, *dst});
    g.edge_text_.push_back(std::move(edges[e].text));
    g.edge_features_.insert(g.edge_features_.end(), edges[e].embedding.begin(),
                            edges[e].embedding.end());
  }

  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_u64(h, dimension);
  h = hash_u64(h, directed ? 1 : 0);
  h = hash_u64(h, g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    h = hash_u64(h, static_cast<std::uint64_t>(g.original_ids_[v]));
    h = hash_text(h, g.node_text_[v]);
    h = hash_floats(h, g.node_embedding(v));
  }
  h = hash_u64(h, g.num_edges());
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    h = hash_u64(h, g.edges_[e].src);
    h = hash_u64(h, g.edges_[e].dst);
    h = hash_text(h, g.edge_text_[e]);
    h = hash_floats(h, g.edge_embedding(e));
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  g.identity_ = hex;
  return g;
}

std::optional<NodeId> TextualGraph::find_original(std::int64_t original) const {
  auto it = std::lower_bound(sorted_original_.begin(), sorted_original_.end(), original);
  if (it == sorted_original_.end() || *it != original) return std::nullopt;
  return sorted_dense_[static_cast<std::size_t>(it - sorted_original_.begin())];
}

bool TextualGraph::operator==(const TextualGraph& other) const {
  auto same_bits = [](std::span<const float> a, std::span<const float> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](float x, float y) {
      return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
    });
  };
  auto same_edges = std::equal(edges_.begin(), edges_.end(), other.edges_.begin(),
                               other.edges_.end(), [](const Edge& a, const Edge& b) {
                                 return a.src == b.src && a.dst == b.dst;
                               });
  return dimension_ == other.dimension_ && directed_ == other.directed_ &&
         original_ids_ == other.original_ids_ && node_text_ == other.node_text_ &&
         edge_text_ == other.edge_text_ && same_edges &&
         same_bits(node_features_, other.node_features_) &&
         same_bits(edge_features_, other.edge_features_);
}

std::vector<EdgeIndex> induced_edges(const TextualGraph& graph, std::span<const NodeId> nodes) {
  std::vector<char> member(graph.num_nodes(), 0);
  for (NodeId v : nodes) {
    if (v >= graph.num_nodes()) {
      throw std::out_of_range("node id " + std::to_string(v) + " is not in the graph");
    }
    member[v] = 1;
  }
  std::vector<EdgeIndex> out;
  if (nodes.empty()) return out;
  const auto edges = graph.edges();
  for (EdgeIndex e = 0; e < edges.size(); ++e) {
    if (member[edges[e].src] && member[edges[e].dst]) out.push_back(e);
  }
  return out;
}

bool is_closed(const TextualGraph& graph, const Subgraph& sub) {
  std::vector<char> member(graph.num_nodes(), 0);
  for (NodeId v : sub.nodes) {
    if (v >= graph.num_nodes()) return false;
    member[v] = 1;
  }
  for (EdgeIndex e : sub.edges) {
    if (e >= graph.num_edges()) return false;
    const Edge& edge = graph.edge(e);
    if (!member[edge.src] || !member[edge.dst]) return false;
  }
  return true;
}

}  // namespace attnret
