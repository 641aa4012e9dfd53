#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "attnret/graph.hpp"
#include "attnret/kernels.hpp"

namespace attnret {

enum class EdgePolicy {
  induced,        // E* = every parent edge with both endpoints in V*
  selected_only,  // E* = E_topk (its endpoints are always in V*)
};

EdgePolicy parse_edge_policy(std::string_view name);
std::string_view to_string(EdgePolicy policy);

struct RetrievalConfig {
  std::size_t k_nodes = 3;
  std::size_t k_edges = 3;
  // Cosine never exceeds 1, so the 1.1 defaults leave plain top-k.
  double threshold_node = 1.1;
  double threshold_edge = 1.1;
  EdgePolicy edge_policy = EdgePolicy::induced;

  void validate() const;
};

struct SelectionTrace {
  std::vector<double> node_scores;
  std::vector<double> edge_scores;
  std::vector<NodeId> v_topk;
  std::vector<EdgeIndex> e_topk;
  std::vector<NodeId> v_incident;
};

struct AttentionResult {
  Subgraph subgraph;
  SelectionTrace trace;
};

/// Query-aware subgraph selection:
///   V_topk     = nodes scoring >= threshold_node ∪ top k_nodes nodes
///   E_topk     = edges scoring >= threshold_edge ∪ top k_edges edges
///   V_incident = endpoints(E_topk)
///   V*         = V_topk ∪ V_incident
///   E*         = per `edge_policy`
/// The result is not necessarily connected.
AttentionResult retrieve_attention(const TextualGraph& graph, const Query& query,
                                   const RetrievalConfig& cfg,
                                   Execution exec = Execution::parallel);

/// `{"e_topk", "edge_scores", "node_scores", "v_incident", "v_star", "v_topk"}`
/// as one compact JSON object.
std::string trace_to_json(const SelectionTrace& trace, const Subgraph& sub);

}  // namespace attnret
