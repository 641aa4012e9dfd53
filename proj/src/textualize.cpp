#include "attnret/textualize.hpp"

#include <stdexcept>
#include <vector>

namespace attnret {

TextStyle parse_text_style(std::string_view name) {
  if (name == "triples") return TextStyle::triples;
  if (name == "lists" || name == "node-edge-lists") return TextStyle::lists;
  throw std::invalid_argument("unknown textualization style '" + std::string(name) + "'");
}

namespace {

void check_subgraph(const TextualGraph& graph, const Subgraph& sub) {
  for (NodeId v : sub.nodes) {
    if (v >= graph.num_nodes()) {
      throw std::out_of_range("subgraph node " + std::to_string(v) + " is not in the graph");
    }
  }
  for (EdgeIndex e : sub.edges) {
    if (e >= graph.num_edges()) {
      throw std::out_of_range("subgraph edge " + std::to_string(e) + " is not in the graph");
    }
  }
}

std::vector<std::string> triple_lines(const TextualGraph& graph, const Subgraph& sub) {
  std::vector<std::string> lines;
  std::vector<char> covered(graph.num_nodes(), 0);
  for (EdgeIndex e : sub.edges) {
    const Edge& edge = graph.edge(e);
    covered[edge.src] = covered[edge.dst] = 1;
    lines.push_back(graph.node_text(edge.src) + ", " + graph.edge_text(e) + ", " +
                    graph.node_text(edge.dst));
  }
  for (NodeId v : sub.nodes) {
    if (!covered[v]) lines.push_back("node: " + graph.node_text(v));
  }
  return lines;
}

std::vector<std::string> list_lines(const TextualGraph& graph, const Subgraph& sub) {
  std::vector<std::string> lines;
  if (sub.nodes.empty() && sub.edges.empty()) return lines;
  lines.emplace_back("node_id,node_attr");
  for (NodeId v : sub.nodes) lines.push_back(std::to_string(v) + "," + graph.node_text(v));
  lines.emplace_back("src,edge_attr,dst");
  for (EdgeIndex e : sub.edges) {
    const Edge& edge = graph.edge(e);
    lines.push_back(std::to_string(edge.src) + "," + graph.edge_text(e) + "," +
                    std::to_string(edge.dst));
  }
  return lines;
}

}  // namespace

std::string textualize(const TextualGraph& graph, const Subgraph& sub,
                       const TextualizationStyle& style) {
  check_subgraph(graph, sub);
  if (style.max_chars && *style.max_chars == 0) {
    throw std::invalid_argument("max_chars must be positive");
  }
  const auto lines =
      style.style == TextStyle::triples ? triple_lines(graph, sub) : list_lines(graph, sub);

  std::string out;
  for (const auto& line : lines) out += line + '\n';
  if (!style.max_chars || out.size() <= *style.max_chars) return out;

  // Keep the longest prefix of whole lines that still leaves room for the
  // omission marker.
  const std::size_t limit = *style.max_chars;
  std::size_t kept = 0;
  std::size_t used = 0;
  std::string best;
  for (std::size_t i = 0; i <= lines.size(); ++i) {
    const std::string marker = "... (" + std::to_string(lines.size() - i) + " more lines)\n";
    if (used + marker.size() <= limit) {
      kept = i;
      best = marker;
    }
    if (i < lines.size()) used += lines[i].size() + 1;
    if (used > limit) break;
  }
  if (best.empty()) return {};
  std::string truncated;
  for (std::size_t i = 0; i < kept; ++i) truncated += lines[i] + '\n';
  return truncated + best;
}

}  // namespace attnret
