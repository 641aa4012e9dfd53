#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "attnret/embedder.hpp"
#include "attnret/graph.hpp"

namespace attnret {

struct LoadOptions {
  /// When set, node/edge records without an `embedding` field are filled
  /// from this source (and an `embeddings.jsonl` found next to the graph
  /// files is used as its table). When unset, a missing embedding is an error.
  std::optional<EmbedderConfig> embedder;
};

/// Reads `graph.json`, `nodes.jsonl` and `edges.jsonl` from `dir`.
TextualGraph load_graph(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the three graph files. Output is byte-deterministic: keys sorted,
/// no insignificant whitespace, floats in shortest round-trip form.
void save_graph(const TextualGraph& graph, const std::filesystem::path& dir);

/// Query JSONL: `{"embedding": [...], "gold_nodes": [...], "id": str, "text": str}`.
/// `gold_nodes` uses the ids found in nodes.jsonl and is optional; a missing
/// `embedding` is computed with `embedder` when given.
std::vector<Query> load_queries(const std::filesystem::path& path, const TextualGraph& graph,
                                const std::optional<EmbedderConfig>& embedder = std::nullopt);
void save_queries(const std::vector<Query>& queries, const TextualGraph& graph,
                  const std::filesystem::path& path);

/// One compact JSON object (no trailing newline):
/// `{"edges": [...], "graph": str, "nodes": [...]}` plus `"objective"` when given.
std::string subgraph_to_json(const Subgraph& sub, std::optional<double> objective = std::nullopt);
Subgraph subgraph_from_json(const std::string& line);

void save_subgraph(const Subgraph& sub, const std::filesystem::path& path,
                   std::optional<double> objective = std::nullopt);
Subgraph load_subgraph(const std::filesystem::path& path);
/// Reads every non-empty line of a subgraph JSONL file.
std::vector<Subgraph> load_subgraphs(const std::filesystem::path& path);

/// Formats a double exactly as the JSON writer does.
std::string format_number(double value);

}  // namespace attnret
