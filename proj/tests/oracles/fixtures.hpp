#pragma once

// Random fixture generators shared by the unit and acceptance suites.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "attnret/graph.hpp"
#include "attnret/random.hpp"
#include "attnret/retrieval.hpp"

namespace attnret::testing {

/// Small random graph. Some rows are copies of earlier ones so score ties
/// occur; self-loops and parallel edges appear naturally.
inline TextualGraph random_graph(Rng& rng, std::size_t max_nodes, std::size_t max_edges,
                                 std::size_t dim, bool allow_empty = true) {
  const std::size_t n = allow_empty ? rng.below(max_nodes + 1) : 1 + rng.below(max_nodes);
  const std::size_t m = n == 0 ? 0 : rng.below(max_edges + 1);
  auto random_row = [&](std::vector<std::vector<float>>& seen) {
    std::vector<float> row(dim);
    if (!seen.empty() && rng.uniform() < 0.2) {
      row = seen[rng.below(seen.size())];
    } else if (rng.uniform() < 0.03) {
      // all-zero rows exercise the zero-norm convention
    } else {
      for (float& x : row) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    seen.push_back(row);
    return row;
  };
  std::vector<std::vector<float>> node_rows;
  std::vector<NodeRecord> nodes(n);
  for (std::size_t v = 0; v < n; ++v) {
    nodes[v].id = static_cast<std::int64_t>(v);
    nodes[v].text = "n" + std::to_string(v);
    nodes[v].embedding = random_row(node_rows);
  }
  std::vector<std::vector<float>> edge_rows;
  std::vector<EdgeRecord> edges(m);
  for (std::size_t e = 0; e < m; ++e) {
    edges[e].src = static_cast<std::int64_t>(rng.below(n));
    edges[e].dst = static_cast<std::int64_t>(rng.below(n));
    edges[e].text = "r" + std::to_string(e);
    edges[e].embedding = random_row(edge_rows);
  }
  return TextualGraph::from_records(dim, rng.uniform() < 0.5, std::move(nodes), std::move(edges));
}

inline Query random_query(Rng& rng, std::size_t dim) {
  Query q;
  q.id = "q";
  q.embedding.resize(dim);
  for (double& x : q.embedding) x = rng.uniform(-1.0, 1.0);
  return q;
}

/// Thresholds are sometimes disabled, sometimes random, sometimes equal to a
/// score that occurs so the >= boundary is hit.
inline double random_threshold(Rng& rng, const std::vector<double>& scores) {
  const double u = rng.uniform();
  if (u < 0.4) return 1.1;
  if (u < 0.7 && !scores.empty()) return scores[rng.below(scores.size())];
  return rng.uniform(-1.0, 1.0);
}

inline RetrievalConfig random_config(Rng& rng, const std::vector<double>& node_scores,
                                     const std::vector<double>& edge_scores) {
  RetrievalConfig cfg;
  cfg.k_nodes = rng.below(6);
  cfg.k_edges = rng.below(6);
  cfg.threshold_node = random_threshold(rng, node_scores);
  cfg.threshold_edge = random_threshold(rng, edge_scores);
  cfg.edge_policy = rng.uniform() < 0.5 ? EdgePolicy::induced : EdgePolicy::selected_only;
  return cfg;
}

}  // namespace attnret::testing
