#pragma once

// Edge-subset enumeration for prize-collecting Steiner trees. Independent of
// the solver's node-subset + MST route: every subset of non-loop edges that
// forms a tree is scored directly, plus the empty and single-node solutions.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "attnret/graph.hpp"
#include "attnret/pcst.hpp"

namespace attnret::testing {

inline double oracle_pcst_optimum(const TextualGraph& g, const PcstInstance& inst) {
  double best = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) best = std::max(best, inst.prizes[v]);

  std::vector<EdgeIndex> usable;
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    if (g.edge(e).src != g.edge(e).dst) usable.push_back(e);
  }
  if (usable.size() > 20) throw std::invalid_argument("oracle limited to 20 edges");

  const std::uint32_t total = std::uint32_t{1} << usable.size();
  std::vector<NodeId> label(g.num_nodes());
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    std::iota(label.begin(), label.end(), NodeId{0});
    auto root = [&](NodeId x) {
      while (label[x] != x) x = label[x];
      return x;
    };
    bool cycle = false;
    std::vector<char> touched(g.num_nodes(), 0);
    double cost = 0.0;
    std::size_t edge_count = 0;
    for (std::size_t i = 0; i < usable.size() && !cycle; ++i) {
      if (!(mask >> i & 1U)) continue;
      const Edge& e = g.edge(usable[i]);
      const NodeId a = root(e.src), b = root(e.dst);
      if (a == b) cycle = true;
      label[a] = b;
      touched[e.src] = touched[e.dst] = 1;
      cost += inst.costs[usable[i]];
      ++edge_count;
    }
    if (cycle) continue;
    std::size_t node_count = 0;
    double prize = 0.0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (touched[v]) {
        ++node_count;
        prize += inst.prizes[v];
      }
    }
    if (node_count != edge_count + 1) continue;  // forest, not a tree
    best = std::max(best, prize - cost);
  }
  return best;
}

/// Edges form one tree spanning exactly the node set (or there are no edges
/// and at most one node), and everything references the parent graph.
inline bool is_single_tree(const TextualGraph& g, const Subgraph& sub) {
  if (!is_closed(g, sub)) return false;
  if (sub.edges.empty()) return sub.nodes.size() <= 1;
  if (sub.edges.size() + 1 != sub.nodes.size()) return false;
  std::vector<NodeId> label(g.num_nodes());
  std::iota(label.begin(), label.end(), NodeId{0});
  auto root = [&](NodeId x) {
    while (label[x] != x) x = label[x];
    return x;
  };
  for (EdgeIndex e : sub.edges) {
    const NodeId a = root(g.edge(e).src), b = root(g.edge(e).dst);
    if (a == b) return false;
    label[a] = b;
  }
  const NodeId r = root(sub.nodes.front());
  for (NodeId v : sub.nodes) {
    if (root(v) != r) return false;
  }
  return true;
}

}  // namespace attnret::testing
