#include "attnret/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "json_util.hpp"

namespace attnret {

EdgePolicy parse_edge_policy(std::string_view name) {
  if (name == "induced") return EdgePolicy::induced;
  if (name == "selected" || name == "selected-only") return EdgePolicy::selected_only;
  throw std::invalid_argument("unknown edge policy '" + std::string(name) + "'");
}

std::string_view to_string(EdgePolicy policy) {
  return policy == EdgePolicy::induced ? "induced" : "selected";
}

void RetrievalConfig::validate() const {
  if (std::isnan(threshold_node) || std::isnan(threshold_edge)) {
    throw std::invalid_argument("retrieval thresholds must not be NaN");
  }
}

AttentionResult retrieve_attention(const TextualGraph& graph, const Query& query,
                                   const RetrievalConfig& cfg, Execution exec) {
  cfg.validate();
  if (query.embedding.size() != graph.dimension()) {
    throw std::invalid_argument("dimension mismatch: query '" + query.id + "' has " +
                                std::to_string(query.embedding.size()) +
                                " components, graph has " + std::to_string(graph.dimension()));
  }
  for (double x : query.embedding) {
    if (!std::isfinite(x)) throw std::invalid_argument("query embedding is not finite");
  }

  AttentionResult result;
  SelectionTrace& trace = result.trace;
  const std::size_t d = graph.dimension();
  trace.node_scores = cosine_scores(query.embedding, {graph.node_features(), d}, exec);
  trace.edge_scores = cosine_scores(query.embedding, {graph.edge_features(), d}, exec);
  trace.v_topk = select_topk_union(trace.node_scores, cfg.k_nodes, cfg.threshold_node);
  trace.e_topk = select_topk_union(trace.edge_scores, cfg.k_edges, cfg.threshold_edge);

  for (EdgeIndex e : trace.e_topk) {
    trace.v_incident.push_back(graph.edge(e).src);
    trace.v_incident.push_back(graph.edge(e).dst);
  }
  std::sort(trace.v_incident.begin(), trace.v_incident.end());
  trace.v_incident.erase(std::unique(trace.v_incident.begin(), trace.v_incident.end()),
                         trace.v_incident.end());

  Subgraph& sub = result.subgraph;
  sub.graph = graph.identity();
  std::set_union(trace.v_topk.begin(), trace.v_topk.end(), trace.v_incident.begin(),
                 trace.v_incident.end(), std::back_inserter(sub.nodes));
  if (cfg.edge_policy == EdgePolicy::induced) {
    sub.edges = induced_edges(graph, sub.nodes);
  } else {
    // Endpoints of E_topk are in V* by construction, so nothing is dropped.
    sub.edges = trace.e_topk;
  }
  return result;
}

std::string trace_to_json(const SelectionTrace& trace, const Subgraph& sub) {
  detail::json rec = {{"e_topk", detail::to_json_array(trace.e_topk)},
                      {"edge_scores", detail::to_json_array(trace.edge_scores)},
                      {"node_scores", detail::to_json_array(trace.node_scores)},
                      {"v_incident", detail::to_json_array(trace.v_incident)},
                      {"v_star", detail::to_json_array(sub.nodes)},
                      {"v_topk", detail::to_json_array(trace.v_topk)}};
  return rec.dump();
}

}  // namespace attnret
